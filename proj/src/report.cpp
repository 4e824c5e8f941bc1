#include "bhpp/report.hpp"

#include <charconv>
#include <json.hpp>
#include <ostream>

namespace bhpp::report {

namespace {

using nlohmann::json;

json trace_object(const PhaseTrace& t) {
  return json{{"selective_rounds", t.selective_rounds},
              {"sequential_rounds", t.sequential_rounds},
              {"power_iterations", t.power_iterations},
              {"pushes", t.pushes},
              {"terminated_by", to_string(t.terminated_by)}};
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

void write_ranked_tsv(std::ostream& out, const BipartiteGraph& g, std::span<const RankedNode> ranked) {
  for (const auto& r : ranked) out << g.u_label(r.node) << '\t' << format_double(r.score) << '\n';
}

void write_ranked_jsonl(std::ostream& out, const BipartiteGraph& g, const QueryResult& result,
                        std::span<const RankedNode> ranked, bool verbose) {
  const std::string& query = g.u_label(result.query);
  if (verbose) {
    json summary{{"type", "summary"},
                 {"method", result.method},
                 {"query", query},
                 {"epsilon", result.epsilon},
                 {"epsilon_b", result.epsilon_b},
                 {"epsilon_f", result.epsilon_f},
                 {"gamma", result.gamma},
                 {"timing_ms",
                  {{"backward", result.timing.backward_ms},
                   {"forward", result.timing.forward_ms},
                   {"total", result.timing.total_ms}}},
                 {"phase_trace", {{"backward", trace_object(result.backward)}, {"forward", trace_object(result.forward)}}}};
    out << summary.dump() << '\n';
  }
  std::size_t rank = 1;
  for (const auto& r : ranked) {
    json row{{"query", query}, {"rank", rank++}, {"label", g.u_label(r.node)}, {"score", r.score}};
    out << row.dump() << '\n';
  }
}

void write_ranked(std::ostream& out, Format format, const BipartiteGraph& g, const QueryResult& result,
                  std::span<const RankedNode> ranked, bool verbose) {
  if (format == Format::tsv) {
    write_ranked_tsv(out, g, ranked);
  } else {
    write_ranked_jsonl(out, g, result, ranked, verbose);
  }
}

std::string trace_json(const PhaseTrace& trace) { return trace_object(trace).dump(); }

std::string round_json(const RoundRecord& record, std::string_view stage) {
  return json{{"stage", stage},
              {"phase", to_string(record.phase)},
              {"round", record.round},
              {"pushes", record.pushes},
              {"residue_mass", record.residue_mass}}
      .dump();
}

}  // namespace bhpp::report
