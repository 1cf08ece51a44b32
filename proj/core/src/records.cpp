#include "advgraph/records.hpp"

#include <fstream>

#include "advgraph/error.hpp"
#include "json_io.hpp"

namespace advgraph {

using detail::json;

std::string StateToJson(const InputState& state) { return detail::ToJson(state).dump(); }

InputState StateFromJson(std::string_view text) {
  try {
    return detail::StateFrom(detail::ParseDocument(text, "state"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("state: ") + e.what());
  }
}

std::string EdgeToJson(const TransformationEdge& edge) { return detail::ToJson(edge).dump(); }

TransformationEdge EdgeFromJson(std::string_view text) {
  try {
    return detail::EdgeFrom(detail::ParseDocument(text, "edge"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("edge: ") + e.what());
  }
}

std::string RecordToJson(const GenerationRecord& r) {
  json j;
  j["index"] = r.index;
  j["success"] = r.success;
  j["transforms_used"] = r.transforms_used;
  j["original_label"] = r.original_label;
  j["final_label"] = r.final_label;
  j["original_score"] = r.original_score;
  j["best_score"] = r.best_score;
  j["original"] = detail::ToJson(r.original);
  j["final"] = detail::ToJson(r.final);
  json edges = json::array();
  for (const auto& e : r.edge_sequence) edges.push_back(detail::ToJson(e));
  j["edge_sequence"] = std::move(edges);
  if (r.error) j["error"] = *r.error;
  return j.dump();
}

GenerationRecord RecordFromJson(std::string_view line) {
  try {
    json j = detail::ParseDocument(line, "record");
    GenerationRecord r;
    r.index = j.at("index").get<std::size_t>();
    r.success = j.at("success").get<bool>();
    r.transforms_used = j.at("transforms_used").get<std::size_t>();
    r.original_label = j.at("original_label").get<std::size_t>();
    r.final_label = j.at("final_label").get<std::size_t>();
    r.original_score = j.at("original_score").get<double>();
    r.best_score = j.at("best_score").get<double>();
    r.original = detail::StateFrom(j.at("original"));
    r.final = detail::StateFrom(j.at("final"));
    for (const auto& e : j.at("edge_sequence")) r.edge_sequence.push_back(detail::EdgeFrom(e));
    if (j.contains("error")) r.error = j["error"].get<std::string>();
    if (r.transforms_used != r.edge_sequence.size()) {
      throw Error(ErrorCode::kParse, "record: transforms_used disagrees with edge_sequence");
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("record: ") + e.what());
  }
}

std::string TimingToJson(const GenerationRecord& r) {
  return json{{"index", r.index}, {"elapsed", r.elapsed}}.dump();
}

namespace {

void WriteLines(const std::string& path, const std::vector<GenerationRecord>& records,
                std::string (*fmt)(const GenerationRecord&)) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  for (const auto& r : records) out << fmt(r) << "\n";
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

}  // namespace

void WriteRecords(const std::string& path, const std::vector<GenerationRecord>& records) {
  WriteLines(path, records, RecordToJson);
}

void WriteTimings(const std::string& path, const std::vector<GenerationRecord>& records) {
  WriteLines(path, records, TimingToJson);
}

std::vector<GenerationRecord> ReadRecords(const std::string& path,
                                          const std::string& timings_path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::vector<GenerationRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(RecordFromJson(line));
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!timings_path.empty()) {
    std::ifstream tin(timings_path);
    if (!tin) throw Error(ErrorCode::kIo, "cannot read " + timings_path);
    std::size_t i = 0;
    while (std::getline(tin, line)) {
      if (line.empty()) continue;
      json j = detail::ParseDocument(line, timings_path);
      if (i >= out.size() || j.at("index").get<std::size_t>() != out[i].index) {
        throw Error(ErrorCode::kParse, timings_path + ": does not match the results file");
      }
      out[i++].elapsed = j.at("elapsed").get<double>();
    }
    if (i != out.size()) throw Error(ErrorCode::kParse, timings_path + ": too few lines");
  }
  return out;
}

std::string ReportToJson(const MetricsReport& m) {
  json j;
  j["total"] = m.total;
  j["successes"] = m.successes;
  j["errors"] = m.errors;
  j["success_rate"] = m.success_rate;
  j["avg_transforms"] = m.avg_transforms ? json(*m.avg_transforms) : json(nullptr);
  j["avg_time_per_sample"] = m.avg_time;
  return j.dump(1);
}

}  // namespace advgraph
