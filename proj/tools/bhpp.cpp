// bhpp command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 a method was
// excluded by the timeout.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "bhpp/baselines.hpp"
#include "bhpp/eval.hpp"
#include "bhpp/graph.hpp"
#include "bhpp/kernels.hpp"
#include "bhpp/push.hpp"
#include "bhpp/query.hpp"
#include "bhpp/report.hpp"
#include "bhpp/rng.hpp"

namespace {

using namespace bhpp;
using Clock = std::chrono::steady_clock;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitTimeout = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::string graph;
  std::string meta;
  std::string cache;
  std::string out;
  std::string delimiter;
  std::optional<double> default_weight;
  std::size_t kcore = 0;

  double alpha = 0.15;
  std::optional<std::size_t> tau;
  double epsilon = 1e-4;
  double p_f = 1e-6;
  std::string method = "ssbipush";
  std::string node;
  std::size_t k = 10;
  bool include_query = false;
  std::string format = "tsv";
  bool verbose = false;
  std::string trace;
  std::uint64_t seed = 1;
  int threads = 0;

  std::vector<double> epsilons{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  std::vector<std::string> methods;
  std::size_t queries = 100;
  double timeout_sec = 3600.0;

  std::vector<std::size_t> ks{5, 10};
  double holdout = 0.2;
  bool weighted_degree = false;
  std::size_t users = 100;
  std::size_t negatives = 100;
  std::size_t s_size = 50;

  std::size_t u_count = 1000;
  std::size_t v_count = 1000;
  std::size_t edge_count = 10000;
  double weight_min = 0.0;
  double weight_max = 10.0;
  double skew = 0.0;
  bool binary = false;
};

Exec exec_of(const Config& c) { return c.threads == 1 ? Exec::serial : Exec::parallel; }

EdgeListOptions edge_options(const Config& c) {
  EdgeListOptions o;
  if (!c.delimiter.empty()) {
    if (c.delimiter == "\\t" || c.delimiter == "tab") {
      o.delimiter = '\t';
    } else if (c.delimiter.size() == 1) {
      o.delimiter = c.delimiter[0];
    } else {
      throw UsageError("--delimiter must be a single character");
    }
  }
  o.default_weight = c.default_weight;
  return o;
}

BipartiteGraph load(const Config& c) {
  if (c.graph.empty()) throw UsageError("--graph is required");
  auto g = load_graph_file(c.graph, edge_options(c));
  if (c.kcore > 0) g = k_core_filter(g, c.kcore);
  return g;
}

bool file_exists(const std::string& path) { return std::ifstream(path).good(); }

IndexMeta meta_for(const Config& c, const BipartiteGraph& g) {
  std::string path = c.meta;
  if (path.empty() && file_exists(c.graph + ".meta")) path = c.graph + ".meta";
  if (path.empty()) return build_index_meta(g, c.alpha, c.tau, exec_of(c));
  auto meta = load_index_meta(path);
  if (meta.graph_fingerprint != g.fingerprint()) throw GraphError("metadata '" + path + "' was built for another graph");
  if (meta.alpha != c.alpha) throw UsageError("metadata was built for alpha=" + report::format_double(meta.alpha));
  return meta;
}

NodeId find_query(const BipartiteGraph& g, const std::string& label) {
  if (label.empty()) throw UsageError("--node is required");
  auto id = g.find_u(label);
  if (!id) throw GraphError("unknown U label '" + label + "'");
  return *id;
}

report::Format format_of(const Config& c) {
  if (c.format == "tsv") return report::Format::tsv;
  if (c.format == "jsonl" || c.format == "json-lines") return report::Format::jsonl;
  throw UsageError("--format must be tsv or jsonl");
}

void check_epsilon(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw UsageError("epsilon must lie in (0, 1)");
}

std::optional<Clock::time_point> deadline_of(const Config& c) {
  if (!(c.timeout_sec > 0.0)) return std::nullopt;
  return Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(c.timeout_sec));
}

// ---------------------------------------------------------------------------

int cmd_synth(const Config& c) {
  SynthParams p{c.u_count, c.v_count, c.edge_count, c.weight_min, c.weight_max, c.skew};
  auto g = synth_bipartite(p, c.seed);
  if (c.out.empty()) {
    write_edge_list(std::cout, g);
  } else if (c.binary) {
    save_binary_file(c.out, g);
  } else {
    std::ofstream f(c.out);
    if (!f) throw GraphError("cannot write '" + c.out + "'");
    write_edge_list(f, g);
  }
  std::fprintf(stderr, "synth: |U|=%zu |V|=%zu |E|=%zu\n", g.u_count(), g.v_count(), g.edge_count());
  return kExitOk;
}

int cmd_preprocess(const Config& c) {
  const auto t0 = Clock::now();
  auto g = load(c);
  auto meta = build_index_meta(g, c.alpha, c.tau, exec_of(c));
  const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  const std::string cache = c.cache.empty() ? c.graph + ".bin" : c.cache;
  save_binary_file(cache, g);
  save_index_meta(cache + ".meta", meta);
  std::printf("cache\t%s\n", cache.c_str());
  std::printf("nodes_u\t%zu\nnodes_v\t%zu\nedges\t%zu\n", g.u_count(), g.v_count(), g.edge_count());
  std::printf("lambda\t%.17g\nmu\t%.17g\ntau\t%zu\nbuild_ms\t%.3f\n", meta.lambda, meta.mu, meta.tau, ms);
  return kExitOk;
}

QueryResult run_method(const std::string& method, const BipartiteGraph& g, const IndexMeta& meta,
                       const AliasTables* alias, NodeId q, double eps, const Config& c, const PushOptions& opts,
                       std::optional<Clock::time_point> deadline) {
  if (method == "ssbipush") return bhpp_query(g, meta, q, eps, opts);
  if (method == "pisp") return pisp_query(g, q, c.alpha, eps, opts.exec);
  if (method == "mcsp") {
    McOptions mc{opts.exec, deadline};
    return mcsp_query(g, *alias, q, c.alpha, eps, c.p_f, stream_seed(c.seed, "mc", q), mc);
  }
  throw UsageError("unknown method '" + method + "'");
}

int cmd_query(const Config& c, bool top) {
  check_epsilon(c.epsilon);
  auto fmt = format_of(c);
  auto g = load(c);
  auto meta = meta_for(c, g);
  const NodeId q = find_query(g, c.node);

  std::unique_ptr<std::ofstream> trace;
  PushOptions opts;
  opts.exec = exec_of(c);
  if (!c.trace.empty()) {
    trace = std::make_unique<std::ofstream>(c.trace);
    if (!*trace) throw GraphError("cannot write '" + c.trace + "'");
    opts.on_round = [&trace](const RoundRecord& r, const ResidueLedger*) {
      const bool fwd = r.phase == Phase::forward_selective || r.phase == Phase::power;
      *trace << report::round_json(r, fwd ? "forward" : "backward") << '\n';
    };
  }
  std::optional<AliasTables> alias;
  if (c.method == "mcsp") alias = build_alias(g);
  QueryResult res;
  try {
    res = run_method(c.method, g, meta, alias ? &*alias : nullptr, q, c.epsilon, c, opts, deadline_of(c));
  } catch (const TimeoutError& e) {
    std::fprintf(stderr, "bhpp: %s excluded: %s\n", c.method.c_str(), e.what());
    return kExitTimeout;
  }
  const std::size_t k = top ? c.k : g.u_count();
  if (top && k == 0) throw UsageError("--k must be >= 1");
  auto ranked = topk(res, k, top && !c.include_query);
  report::write_ranked(std::cout, fmt, g, res, ranked, c.verbose);
  return kExitOk;
}

struct Cell {
  std::vector<double> ms;
  bool excluded = false;
  std::string note;
};

int cmd_bench(const Config& c) {
  auto g = load(c);
  auto meta = meta_for(c, g);
  auto methods = c.methods.empty() ? std::vector<std::string>{"ssbipush", "mcsp", "pisp"} : c.methods;
  auto eps = c.epsilons;
  for (double e : eps) check_epsilon(e);
  std::sort(eps.begin(), eps.end(), std::greater<>());

  std::vector<NodeId> pool(g.u_count());
  for (NodeId u = 0; u < g.u_count(); ++u) pool[u] = u;
  Rng rng = make_rng(c.seed, "bench-queries");
  for (std::size_t i = pool.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(std::uniform_int_distribution<std::uint64_t>(0, i - 1)(rng));
    std::swap(pool[i - 1], pool[j]);
  }
  if (pool.size() > c.queries) pool.resize(c.queries);

  std::optional<AliasTables> alias;
  if (std::find(methods.begin(), methods.end(), "mcsp") != methods.end()) alias = build_alias(g);
  PushOptions opts;
  opts.exec = exec_of(c);

  std::map<std::string, bool> dropped;
  bool any_excluded = false;
  std::cout << "# timing\nmethod\tepsilon\tmean_ms\tstddev_ms\tn\tstatus\n";
  std::ostringstream agree;
  agree << "# agreement\nmethod_a\tmethod_b\tepsilon\tmax_abs_diff\tbound\tok\n";
  for (double e : eps) {
    std::map<std::string, Cell> cells;
    std::map<std::string, std::vector<std::vector<double>>> scores;
    for (const auto& m : methods) {
      auto& cell = cells[m];
      if (dropped[m]) {
        cell.excluded = true;
        cell.note = "excluded-at-larger-epsilon";
        continue;
      }
      for (NodeId q : pool) {
        try {
          auto res = run_method(m, g, meta, alias ? &*alias : nullptr, q, e, c, opts, deadline_of(c));
          if (res.timing.total_ms > c.timeout_sec * 1000.0) throw TimeoutError("query exceeded timeout");
          cell.ms.push_back(res.timing.total_ms);
          scores[m].push_back(std::move(res.scores));
        } catch (const TimeoutError&) {
          cell.excluded = true;
          cell.note = "timeout";
          dropped[m] = any_excluded = true;
          scores.erase(m);
          break;
        }
      }
    }
    for (const auto& m : methods) {
      const auto& cell = cells[m];
      if (cell.excluded) {
        std::cout << m << '\t' << report::format_double(e) << "\tNA\tNA\t0\t" << cell.note << '\n';
        continue;
      }
      auto row = eval::summarize(m, 0, "ms", cell.ms);
      std::cout << m << '\t' << report::format_double(e) << '\t' << row.mean << '\t' << row.stddev << '\t' << row.n
                << "\tok\n";
    }
    for (std::size_t a = 0; a < methods.size(); ++a) {
      for (std::size_t b = a + 1; b < methods.size(); ++b) {
        if (!scores.contains(methods[a]) || !scores.contains(methods[b])) continue;
        const auto& sa = scores[methods[a]];
        const auto& sb = scores[methods[b]];
        double worst = 0.0;
        for (std::size_t i = 0; i < sa.size(); ++i) {
          for (std::size_t j = 0; j < sa[i].size(); ++j) worst = std::max(worst, std::abs(sa[i][j] - sb[i][j]));
        }
        const double bound = 2.0 * e;
        agree << methods[a] << '\t' << methods[b] << '\t' << report::format_double(e) << '\t'
              << report::format_double(worst) << '\t' << report::format_double(bound) << '\t'
              << (worst <= bound ? "yes" : "no") << '\n';
      }
    }
  }
  std::cout << agree.str();
  return any_excluded ? kExitTimeout : kExitOk;
}

std::vector<std::pair<std::string, eval::Similarity>> similarities(const Config& c, const BipartiteGraph& train,
                                                                   const IndexMeta& meta) {
  auto names = c.methods.empty() ? std::vector<std::string>{"bhpp", "jaccard", "ppr"} : c.methods;
  std::vector<std::pair<std::string, eval::Similarity>> out;
  for (const auto& n : names) {
    if (n == "bhpp") {
      out.emplace_back(n, eval::bhpp_similarity(train, meta, c.epsilon));
    } else if (n == "jaccard") {
      out.emplace_back(n, eval::jaccard_similarity(train));
    } else if (n == "ppr") {
      out.emplace_back(n, eval::naive_ppr_similarity(train, c.alpha));
    } else if (n == "exact") {
      out.emplace_back(n, eval::exact_bhpp_similarity(train, c.alpha));
    } else {
      throw UsageError("unknown similarity '" + n + "' (bhpp, jaccard, ppr, exact)");
    }
  }
  return out;
}

int cmd_eval_qr(const Config& c) {
  check_epsilon(c.epsilon);
  auto g = load(c);
  eval::QrOptions o;
  o.queries = c.queries;
  o.ks = c.ks;
  o.holdout_ratio = c.holdout;
  o.weighted_degree = c.weighted_degree;
  o.seed = c.seed;
  auto setup = eval::prepare_query_rewriting(g, o);
  auto meta = build_index_meta(setup.split.train, c.alpha, c.tau, exec_of(c));
  std::vector<eval::MetricRow> rows;
  for (const auto& [name, sim] : similarities(c, setup.split.train, meta)) {
    auto r = eval::evaluate_query_rewriting(g, setup, name, sim, o);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  eval::write_metric_report(std::cout, rows);
  return kExitOk;
}

int cmd_eval_rec(const Config& c) {
  check_epsilon(c.epsilon);
  auto g = load(c);
  eval::RecOptions o;
  o.users = c.users;
  o.ks = c.ks;
  o.holdout_ratio = c.holdout;
  o.negatives = c.negatives;
  o.s_size = c.s_size;
  o.seed = c.seed;
  auto setup = eval::prepare_recommendation(g, o);
  auto meta = build_index_meta(setup.split.train, c.alpha, c.tau, exec_of(c));
  std::vector<eval::MetricRow> rows;
  for (const auto& [name, sim] : similarities(c, setup.split.train, meta)) {
    auto r = eval::evaluate_recommendation(setup, name, sim, o);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  eval::write_metric_report(std::cout, rows);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  Config c;
  CLI::App app{"Bidirectional hidden personalized PageRank on weighted bipartite graphs"};
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  const char* io = "Input";
  app.add_option("-g,--graph", c.graph, "Edge list or binary cache")->group(io);
  app.add_option("--meta", c.meta, "Index metadata (default: <graph>.meta when present)")->group(io);
  app.add_option("--delimiter", c.delimiter, "Edge-list field separator (default: whitespace)")->group(io);
  app.add_option("--default-weight", c.default_weight, "Weight for two-field lines")->group(io);
  app.add_option("--kcore", c.kcore, "Apply a k-core filter after loading")->group(io);

  const char* alg = "Algorithm";
  app.add_option("--alpha", c.alpha, "Stop probability")->check(CLI::Range(0.0, 1.0))->group(alg);
  app.add_option("--tau", c.tau, "Power iterations used for lambda")->group(alg);
  app.add_option("-e,--epsilon", c.epsilon, "Absolute error bound")->group(alg);
  app.add_option("--pf", c.p_f, "Monte Carlo failure probability")->group(alg);
  app.add_option("-m,--method", c.method, "ssbipush, mcsp or pisp")->group(alg);
  app.add_option("--seed", c.seed, "Root seed")->group(alg);
  app.add_option("--threads", c.threads, "Thread count; 1 forces the serial kernels")->group(alg);

  const char* outg = "Output";
  app.add_option("-n,--node", c.node, "Query label (U side)")->group(outg);
  app.add_option("-k,--k", c.k, "Result size for topk")->group(outg);
  app.add_flag("--include-query", c.include_query, "Keep the query node in topk output")->group(outg);
  app.add_option("--format", c.format, "tsv or jsonl")->group(outg);
  app.add_flag("-v,--verbose", c.verbose, "Add a summary record with phase traces (jsonl)")->group(outg);
  app.add_option("--trace", c.trace, "Write one JSON record per push round")->group(outg);
  app.add_option("-o,--out", c.out, "Output file (synth)")->group(outg);
  app.add_option("--cache", c.cache, "Binary cache path (preprocess; default <graph>.bin)")->group(outg);

  const char* bench = "Bench and evaluation";
  app.add_option("--epsilons", c.epsilons, "Epsilon sweep")->delimiter(',')->group(bench);
  app.add_option("--methods", c.methods, "Methods or similarities to compare")->delimiter(',')->group(bench);
  app.add_option("--queries", c.queries, "Sampled query nodes")->group(bench);
  app.add_option("--timeout-sec", c.timeout_sec, "Per-query timeout before a method is excluded")->group(bench);
  app.add_option("--ks", c.ks, "Cutoffs")->delimiter(',')->group(bench);
  app.add_option("--holdout", c.holdout, "Held-out edge fraction")->group(bench);
  app.add_flag("--weighted-degree", c.weighted_degree, "Desirability divides by ws instead of degree")->group(bench);
  app.add_option("--users", c.users, "Sampled users (eval-rec)")->group(bench);
  app.add_option("--negatives", c.negatives, "Sampled non-edges per user (eval-rec)")->group(bench);
  app.add_option("--s-size", c.s_size, "Neighborhood size S (eval-rec)")->group(bench);

  const char* syn = "Synthetic graphs";
  app.add_option("--u-count", c.u_count, "|U|")->group(syn);
  app.add_option("--v-count", c.v_count, "|V|")->group(syn);
  app.add_option("--edges", c.edge_count, "|E|")->group(syn);
  app.add_option("--wmin", c.weight_min, "Weights drawn from (wmin, wmax]")->group(syn);
  app.add_option("--wmax", c.weight_max)->group(syn);
  app.add_option("--skew", c.skew, "Power-law endpoint skew, 0 for uniform")->group(syn);
  app.add_flag("--binary", c.binary, "Write a binary cache instead of an edge list")->group(syn);

  auto* synth = app.add_subcommand("synth", "Generate a random bipartite graph");
  auto* pre = app.add_subcommand("preprocess", "Build the binary cache and index metadata");
  auto* query = app.add_subcommand("query", "Score every U node against one query");
  auto* top = app.add_subcommand("topk", "Top-k most similar U nodes");
  auto* bench_cmd = app.add_subcommand("bench", "Query-time sweep over methods and epsilons");
  auto* qr = app.add_subcommand("eval-qr", "Query-rewriting NDCG@k");
  auto* rec = app.add_subcommand("eval-rec", "Item-recommendation precision@k and recall@k");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    kernels::set_threads(c.threads);
    if (synth->parsed()) return cmd_synth(c);
    if (pre->parsed()) return cmd_preprocess(c);
    if (query->parsed()) return cmd_query(c, false);
    if (top->parsed()) return cmd_query(c, true);
    if (bench_cmd->parsed()) return cmd_bench(c);
    if (qr->parsed()) return cmd_eval_qr(c);
    if (rec->parsed()) return cmd_eval_rec(c);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "bhpp: %s\n", e.what());
    return kExitUsage;
  } catch (const GraphError& e) {
    std::fprintf(stderr, "bhpp: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "bhpp: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
