#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "bhpp/graph.hpp"

namespace bhpp {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary cache is little-endian; add byte swapping for this target");

constexpr char kMagic[8] = {'B', 'H', 'P', 'P', 'G', 'R', 'P', 'H'};
constexpr std::uint32_t kVersion = 1;

std::vector<std::string_view> split_fields(std::string_view line, std::optional<char> delim) {
  std::vector<std::string_view> out;
  if (delim) {
    std::size_t start = 0;
    while (true) {
      auto pos = line.find(*delim, start);
      auto field = line.substr(start, pos == std::string_view::npos ? pos : pos - start);
      // Trim surrounding blanks so "a, b, 1" works with ',' as delimiter.
      while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
      while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
      out.push_back(field);
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
  } else {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      if (j > i) out.push_back(line.substr(i, j - i));
      i = j;
    }
  }
  return out;
}

[[noreturn]] void fail_line(std::size_t line_no, const std::string& what) {
  throw GraphError("line " + std::to_string(line_no) + ": " + what);
}

template <typename T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void put_array(std::ostream& out, const std::vector<T>& values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(T)));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw GraphError("truncated binary graph");
  return value;
}

template <typename T>
std::vector<T> get_array(std::istream& in, std::uint64_t count) {
  std::vector<T> values(count);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(count * sizeof(T)));
  if (!in) throw GraphError("truncated binary graph");
  return values;
}

void put_labels(std::ostream& out, const std::vector<std::string>& labels) {
  for (const auto& s : labels) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
}

std::vector<std::string> get_labels(std::istream& in, std::uint64_t count) {
  std::vector<std::string> labels(count);
  for (auto& s : labels) {
    auto len = get<std::uint32_t>(in);
    s.resize(len);
    in.read(s.data(), len);
    if (!in) throw GraphError("truncated binary graph");
  }
  return labels;
}

}  // namespace

BipartiteGraph load_edge_list(std::istream& in, const EdgeListOptions& options) {
  std::vector<std::string> u_labels, v_labels;
  std::unordered_map<std::string, NodeId> u_ids, v_ids;
  std::vector<WeightedEdge> edges;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    auto first = view.find_first_not_of(" \t");
    if (first == std::string_view::npos || view[first] == '#') continue;

    auto fields = split_fields(view, options.delimiter);
    if (fields.size() < 2 || fields.size() > 3) fail_line(line_no, "expected 2 or 3 fields");
    if (fields[0].empty() || fields[1].empty()) fail_line(line_no, "empty label");

    double w = 0.0;
    if (fields.size() == 3) {
      auto f = fields[2];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), w);
      if (ec != std::errc{} || ptr != f.data() + f.size()) fail_line(line_no, "malformed weight");
    } else if (options.default_weight) {
      w = *options.default_weight;
    } else {
      fail_line(line_no, "missing weight");
    }
    if (!(w > 0.0)) fail_line(line_no, "non-positive weight");

    std::string ul(fields[0]), vl(fields[1]);
    if (v_ids.contains(ul) || u_ids.contains(vl)) {
      fail_line(line_no, "label appears on both sides");
    }
    auto [uit, unew] = u_ids.try_emplace(ul, static_cast<NodeId>(u_labels.size()));
    if (unew) u_labels.push_back(ul);
    auto [vit, vnew] = v_ids.try_emplace(vl, static_cast<NodeId>(v_labels.size()));
    if (vnew) v_labels.push_back(vl);
    edges.push_back({uit->second, vit->second, w});
  }
  if (edges.empty()) throw GraphError("empty graph");
  return BipartiteGraph::from_edges(std::move(u_labels), std::move(v_labels), edges);
}

BipartiteGraph load_edge_list_file(const std::string& path, const EdgeListOptions& options) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open '" + path + "'");
  return load_edge_list(in, options);
}

void write_edge_list(std::ostream& out, const BipartiteGraph& g) {
  char buf[64];
  for (const auto& e : g.edges()) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), e.weight);
    out << g.u_label(e.u) << '\t' << g.v_label(e.v) << '\t' << std::string_view(buf, end - buf) << '\n';
  }
}

void write_binary(std::ostream& out, const BipartiteGraph& g) {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, 0);
  put<std::uint64_t>(out, g.u_count());
  put<std::uint64_t>(out, g.v_count());
  put<std::uint64_t>(out, g.edge_count());
  for (const auto* side : {&g.u_side(), &g.v_side()}) {
    put_array(out, side->offsets);
    put_array(out, side->neighbors);
    put_array(out, side->weights);
  }
  put_labels(out, g.u_side().labels);
  put_labels(out, g.v_side().labels);
  if (!out) throw GraphError("failed writing binary graph");
}

BipartiteGraph read_binary(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw GraphError("not a binary graph cache");
  auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw GraphError("unsupported binary graph version " + std::to_string(version));
  (void)get<std::uint32_t>(in);
  auto nu = get<std::uint64_t>(in);
  auto nv = get<std::uint64_t>(in);
  auto ne = get<std::uint64_t>(in);

  auto uo = get_array<std::uint64_t>(in, nu + 1);
  auto un = get_array<NodeId>(in, ne);
  auto uw = get_array<double>(in, ne);
  auto vo = get_array<std::uint64_t>(in, nv + 1);
  auto vn = get_array<NodeId>(in, ne);
  auto vw = get_array<double>(in, ne);
  auto lu = get_labels(in, nu);
  auto lv = get_labels(in, nv);
  if (uo.front() != 0 || uo.back() != ne) throw GraphError("corrupt U offsets");

  std::vector<WeightedEdge> edges;
  edges.reserve(ne);
  for (NodeId u = 0; u < nu; ++u) {
    if (uo[u] > uo[u + 1] || uo[u + 1] > ne) throw GraphError("corrupt U offsets");
    for (auto i = uo[u]; i < uo[u + 1]; ++i) edges.push_back({u, un[i], uw[i]});
  }
  auto g = BipartiteGraph::from_edges(std::move(lu), std::move(lv), edges);
  const auto& vs = g.v_side();
  if (vs.offsets != vo || vs.neighbors != vn || vs.weights != vw) {
    throw GraphError("binary graph sides disagree");
  }
  return g;
}

void save_binary_file(const std::string& path, const BipartiteGraph& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GraphError("cannot write '" + path + "'");
  write_binary(out, g);
}

BipartiteGraph load_binary_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GraphError("cannot open '" + path + "'");
  return read_binary(in);
}

BipartiteGraph load_graph_file(const std::string& path, const EdgeListOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GraphError("cannot open '" + path + "'");
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  bool binary = in.gcount() == sizeof(magic) && std::memcmp(magic, kMagic, sizeof(kMagic)) == 0;
  in.clear();
  in.seekg(0);
  return binary ? read_binary(in) : load_edge_list(in, options);
}

}  // namespace bhpp
