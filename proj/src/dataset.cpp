#include "tsearch/dataset.hpp"

#include <fstream>
#include <json.hpp>
#include <set>

#include "text_util.hpp"
#include "tsearch/errors.hpp"

namespace tsearch {

using nlohmann::json;

namespace {

DatasetEntry parse_entry(const json& j, std::size_t line_no) {
  if (!j.is_object()) throw Error(ErrorCode::parse, "record is not a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "id" && key != "query" && key != "question" && key != "choices" && key != "reference")
      throw Error(ErrorCode::parse, "unknown field '" + key + "'");
  }
  DatasetEntry e;
  if (j.contains("id")) {
    e.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
  } else {
    e.id = std::to_string(line_no);
    if (e.id.size() < 6) e.id.insert(0, 6 - e.id.size(), '0');
  }
  const bool has_query = j.contains("query");
  const bool has_question = j.contains("question");
  if (has_query == has_question) throw Error(ErrorCode::parse, "record needs exactly one of 'query' or 'question'");
  if (has_query) {
    if (j.contains("choices") || j.contains("reference"))
      throw Error(ErrorCode::parse, "'choices' and 'reference' belong to question records");
    e.query = j["query"].get<std::string>();
    if (text::trim(e.query).empty()) throw Error(ErrorCode::parse, "empty query");
    return e;
  }
  EvalItem item;
  item.id = e.id;
  item.question = j["question"].get<std::string>();
  item.reference = j.at("reference").is_string() ? j["reference"].get<std::string>() : j["reference"].dump();
  if (j.contains("choices")) {
    const auto texts = j["choices"].get<std::vector<std::string>>();
    if (texts.size() > 10) throw Error(ErrorCode::parse, "at most ten choices are supported");
    for (std::size_t i = 0; i < texts.size(); ++i) item.choices.push_back({static_cast<char>('A' + i), texts[i]});
  }
  validate(item);
  e.query = format_question(item);
  e.item = std::move(item);
  return e;
}

}  // namespace

std::vector<DatasetEntry> read_dataset(std::istream& in, const std::string& source_name) {
  std::vector<DatasetEntry> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = source_name + ":" + std::to_string(line_no);
    try {
      auto entry = parse_entry(json::parse(line), line_no);
      if (!ids.insert(entry.id).second) throw Error(ErrorCode::parse, "duplicate id '" + entry.id + "'");
      out.push_back(std::move(entry));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::parse, "malformed dataset line " + where + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::parse, "malformed dataset line " + where + ": " + e.what());
    }
  }
  if (out.empty()) throw Error(ErrorCode::parse, "dataset " + source_name + " has no records");
  return out;
}

std::vector<DatasetEntry> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open dataset '" + path + "'");
  return read_dataset(in, path);
}

}  // namespace tsearch
