#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "grasswalk/bench.hpp"
#include "grasswalk/walk.hpp"

namespace grasswalk {

/// Shortest decimal string that parses back to the same double; "inf",
/// "-inf" and "nan" for non-finite values.
std::string format_double(double v);

/// One JSON object per round:
/// {"round", "loss", "accepted_from_sample", "solver_evals", "sample_minima",
///  "min_evaluated", "x" (only with emit_iterates), "flags"}.
std::string round_to_json(const RoundRecord& r, bool emit_iterates);
std::string trace_to_jsonl(const WalkTrace& trace, bool emit_iterates);

/// Inverse of trace_to_jsonl. Rounds written without iterates come back with
/// an empty x. Throws ArgumentError on malformed input.
std::vector<RoundRecord> parse_trace_jsonl(std::string_view text);

/// CSV with header `trial,final_loss,rounds,evals,success`.
std::string summary_csv(const StudySummary& summary);
std::string blindspot_csv(const BlindSpotSummary& summary);

/// Writes to a temporary sibling file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace grasswalk
