#pragma once

// Dataset ingestion: the generic directory format and the raw Planetoid
// citation format (<name>.content / <name>.cites).

#include "gal/graph.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string_view>
#include <unordered_map>

namespace gal {

namespace detail {

inline std::vector<std::string_view> split_tokens(std::string_view line, bool comma) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto is_sep = [&](char c) {
    return comma ? c == ',' : (c == ' ' || c == '\t' || c == '\r');
  };
  if (comma) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    if (line.empty()) return out;
    std::size_t start = 0;
    for (; i <= line.size(); ++i) {
      if (i == line.size() || is_sep(line[i])) {
        auto tok = line.substr(start, i - start);
        while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
        while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
        out.push_back(tok);
        start = i + 1;
      }
    }
    return out;
  }
  while (i < line.size()) {
    while (i < line.size() && is_sep(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_sep(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
T parse_number(std::string_view tok, const std::string& file, std::size_t line) {
  T value{};
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (tok.empty() || ec != std::errc() || ptr != end) {
    throw ParseError(file, line, "non-numeric token '" + std::string(tok) + "'");
  }
  return value;
}

inline bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

inline std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

// Reads edges.tsv, features.csv and (if present) labels.csv from dir. The node
// count is the number of feature rows.
inline AttributedGraph load_generic(const std::filesystem::path& dir) {
  using detail::parse_number;
  const auto features_path = dir / "features.csv";
  const auto edges_path = dir / "edges.tsv";
  const auto labels_path = dir / "labels.csv";

  std::vector<std::vector<double>> rows;
  {
    auto in = detail::open_or_throw(features_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::blank(line)) continue;
      auto toks = detail::split_tokens(line, true);
      std::vector<double> row;
      row.reserve(toks.size());
      for (auto t : toks) row.push_back(parse_number<double>(t, features_path.string(), lineno));
      if (!rows.empty() && row.size() != rows.front().size()) {
        throw ParseError(features_path.string(), lineno,
                         "ragged feature row: " + std::to_string(row.size()) + " values, expected " +
                             std::to_string(rows.front().size()));
      }
      rows.push_back(std::move(row));
    }
  }
  const Index n = static_cast<Index>(rows.size());
  const Index d = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
  Matrix x(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) x(i, j) = rows[i][j];
  }
  rows.clear();

  std::vector<Edge> edges;
  {
    auto in = detail::open_or_throw(edges_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::blank(line)) continue;
      auto toks = detail::split_tokens(line, false);
      if (toks.size() != 2) {
        throw ParseError(edges_path.string(), lineno,
                         "expected 2 columns, found " + std::to_string(toks.size()));
      }
      const auto u = parse_number<std::int64_t>(toks[0], edges_path.string(), lineno);
      const auto v = parse_number<std::int64_t>(toks[1], edges_path.string(), lineno);
      if (u < 0 || v < 0) throw ParseError(edges_path.string(), lineno, "negative node id");
      if (u >= n || v >= n) {
        throw ParseError(edges_path.string(), lineno,
                         "node id " + std::to_string(std::max(u, v)) + " >= n = " + std::to_string(n));
      }
      edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
  }

  std::optional<std::vector<int>> labels;
  if (std::filesystem::exists(labels_path)) {
    auto in = detail::open_or_throw(labels_path);
    std::vector<int> y;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::blank(line)) continue;
      auto toks = detail::split_tokens(line, false);
      if (toks.size() != 1) throw ParseError(labels_path.string(), lineno, "expected one label");
      const int label = parse_number<int>(toks[0], labels_path.string(), lineno);
      if (label < 0) throw ParseError(labels_path.string(), lineno, "negative label");
      y.push_back(label);
    }
    if (static_cast<Index>(y.size()) != n) {
      throw ParseError(labels_path.string(), lineno,
                       std::to_string(y.size()) + " labels for " + std::to_string(n) + " nodes");
    }
    labels = std::move(y);
  }

  return AttributedGraph::from_edges(n, edges, std::move(x), std::move(labels));
}

inline void write_generic(const AttributedGraph& g, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "edges.tsv");
    for (const auto& [u, v] : g.undirected_edges()) out << u << '\t' << v << '\n';
  }
  {
    std::ofstream out(dir / "features.csv");
    const Matrix& x = g.features();
    std::string line;
    for (Index i = 0; i < x.rows(); ++i) {
      line.clear();
      for (Index j = 0; j < x.cols(); ++j) {
        if (j) line += ',';
        line += detail::format_double(x(i, j));
      }
      line += '\n';
      out << line;
    }
  }
  if (g.has_labels()) {
    std::ofstream out(dir / "labels.csv");
    for (int y : g.labels()) out << y << '\n';
  }
  nlohmann::json meta = {{"n", g.num_nodes()}, {"d", g.feature_dim()}, {"classes", g.class_count()}};
  std::ofstream(dir / "meta.json") << meta.dump() << '\n';
}

struct CitationIngest {
  AttributedGraph graph;
  std::vector<std::string> paper_ids;    // dense index -> original id
  std::vector<std::string> class_names;  // class id -> label string
  std::size_t dangling_edges = 0;        // cites lines naming an unknown paper
};

// Parses "<paper_id> <f_1> ... <f_d> <label>" and "<cited> <citing>" files.
// Ids and labels are interned in first-seen order; citations become
// undirected edges.
inline CitationIngest ingest_cora_content(const std::filesystem::path& content_path,
                                          const std::filesystem::path& cites_path) {
  CitationIngest out;
  std::unordered_map<std::string, NodeId> id_index;
  std::unordered_map<std::string, int> label_index;
  std::vector<double> values;
  std::vector<int> labels;
  Index d = -1;

  {
    auto in = detail::open_or_throw(content_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::blank(line)) continue;
      auto toks = detail::split_tokens(line, false);
      if (toks.size() < 2) throw ParseError(content_path.string(), lineno, "malformed line");
      const Index width = static_cast<Index>(toks.size()) - 2;
      if (d < 0) d = width;
      if (width != d) {
        throw ParseError(content_path.string(), lineno,
                         std::to_string(width) + " features, expected " + std::to_string(d));
      }
      std::string pid(toks.front());
      if (id_index.count(pid)) throw ParseError(content_path.string(), lineno, "duplicate paper id " + pid);
      id_index.emplace(pid, static_cast<NodeId>(out.paper_ids.size()));
      out.paper_ids.push_back(std::move(pid));
      for (Index j = 1; j <= width; ++j) {
        values.push_back(detail::parse_number<double>(toks[j], content_path.string(), lineno));
      }
      std::string label(toks.back());
      auto [it, inserted] = label_index.emplace(label, static_cast<int>(out.class_names.size()));
      if (inserted) out.class_names.push_back(label);
      labels.push_back(it->second);
    }
  }
  if (out.paper_ids.empty()) throw Error(content_path.string() + ": empty content file");

  const Index n = static_cast<Index>(out.paper_ids.size());
  Matrix x(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) x(i, j) = values[static_cast<std::size_t>(i * d + j)];
  }

  std::vector<Edge> edges;
  {
    auto in = detail::open_or_throw(cites_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::blank(line)) continue;
      auto toks = detail::split_tokens(line, false);
      if (toks.size() != 2) throw ParseError(cites_path.string(), lineno, "malformed line");
      auto a = id_index.find(std::string(toks[0]));
      auto b = id_index.find(std::string(toks[1]));
      if (a == id_index.end() || b == id_index.end()) {
        ++out.dangling_edges;
        continue;
      }
      edges.emplace_back(a->second, b->second);
    }
  }
  out.graph = AttributedGraph::from_edges(n, edges, std::move(x), std::move(labels));
  return out;
}

}  // namespace gal
