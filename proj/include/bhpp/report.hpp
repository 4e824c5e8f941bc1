#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "bhpp/graph.hpp"
#include "bhpp/push.hpp"
#include "bhpp/query.hpp"

// Output encodings shared by the CLI and the tests. Both encodings print
// scores at full round-trip precision, so a TSV run and a JSON-lines run of
// the same query parse to identical values.
namespace bhpp::report {

enum class Format { tsv, jsonl };

/// "label<TAB>score" per node in rank order.
void write_ranked_tsv(std::ostream& out, const BipartiteGraph& g, std::span<const RankedNode> ranked);

/// One {"query","rank","label","score"} object per node. With `verbose` a
/// leading {"type":"summary"} record carries ε, the split, timings and both
/// phase traces.
void write_ranked_jsonl(std::ostream& out, const BipartiteGraph& g, const QueryResult& result,
                        std::span<const RankedNode> ranked, bool verbose);

void write_ranked(std::ostream& out, Format format, const BipartiteGraph& g, const QueryResult& result,
                  std::span<const RankedNode> ranked, bool verbose);

/// JSON object for a phase trace.
std::string trace_json(const PhaseTrace& trace);

/// One line-delimited JSON record per round: phase, round, n_p, residue mass.
std::string round_json(const RoundRecord& record, std::string_view stage);

/// Shortest decimal that round-trips.
std::string format_double(double x);

}  // namespace bhpp::report
