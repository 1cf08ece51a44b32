#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "advgraph/search.hpp"

namespace advgraph {

// Line formats of the results file. States are tagged objects
// ({"cat":"A"}, {"float":1.5}, {"vector":[...]}, ...) and edges spell out
// their parameter, so a record can be replayed.
std::string StateToJson(const InputState& state);
InputState StateFromJson(std::string_view text);  // kParse
std::string EdgeToJson(const TransformationEdge& edge);
TransformationEdge EdgeFromJson(std::string_view text);  // kParse

// Elapsed time is not part of a record line, so reruns with one seed give
// byte-identical files; it goes to the timing sidecar instead.
std::string RecordToJson(const GenerationRecord& record);
GenerationRecord RecordFromJson(std::string_view line);  // kParse
std::string TimingToJson(const GenerationRecord& record);

void WriteRecords(const std::string& path, const std::vector<GenerationRecord>& records);
void WriteTimings(const std::string& path, const std::vector<GenerationRecord>& records);
// Reads a results file; elapsed comes from `timings_path` when non-empty.
std::vector<GenerationRecord> ReadRecords(const std::string& path,
                                          const std::string& timings_path = "");

std::string ReportToJson(const MetricsReport& report);

}  // namespace advgraph
