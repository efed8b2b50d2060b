#include "tsearch/corpus_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>

#include "text_util.hpp"
#include "tsearch/errors.hpp"

namespace tsearch {

using nlohmann::json;

namespace {

constexpr const char* kIndexFormat = "tsearch-corpus-index";
constexpr int kIndexVersion = 1;

std::string where(const std::string& source, std::size_t line) { return source + ":" + std::to_string(line); }

std::string padded(std::size_t n) {
  std::string s = std::to_string(n);
  if (s.size() < 6) s.insert(0, 6 - s.size(), '0');
  return s;
}

CorpusRecord parse_corpus_line(const std::string& line, std::size_t line_no) {
  const json j = json::parse(line);
  if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
  CorpusRecord r;
  r.line = line_no;
  for (const auto& [key, value] : j.items()) {
    if (key == "task") r.task = value.get<std::string>();
    else if (key == "response") r.response = value.get<std::string>();
    else if (key == "id") r.id = value.is_string() ? value.get<std::string>() : value.dump();
    else throw std::invalid_argument("unknown field '" + key + "'");
  }
  if (!j.contains("task") || text::trim(r.task).empty()) throw std::invalid_argument("missing or empty task");
  if (!j.contains("response")) throw std::invalid_argument("missing response");
  if (j.contains("id") && r.id.empty()) throw std::invalid_argument("empty id");
  if (r.id.empty()) r.id = padded(line_no);
  return r;
}

}  // namespace

CorpusReadResult read_corpus(std::istream& in, const std::string& source_name, bool strict) {
  CorpusReadResult out;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    std::string problem;
    CorpusRecord record;
    try {
      record = parse_corpus_line(line, line_no);
      if (!ids.insert(record.id).second) problem = "duplicate id '" + record.id + "'";
    } catch (const std::exception& e) {
      problem = e.what();
    }
    if (problem.empty()) {
      out.records.push_back(std::move(record));
      continue;
    }
    const std::string message = "malformed corpus line " + where(source_name, line_no) + ": " + problem;
    if (strict) throw Error(ErrorCode::parse, message);
    out.skipped.push_back(message);
  }
  if (in.bad()) throw Error(ErrorCode::io, "read error on " + source_name);
  return out;
}

void write_index(std::ostream& out, const CorpusIndex& index) {
  json header = {{"format", kIndexFormat},
                 {"version", kIndexVersion},
                 {"dimension", index.dimension()},
                 {"count", index.size()}};
  out << header.dump() << '\n';
  for (const auto& ex : index.examples()) {
    json rec = {{"id", ex.id}, {"task", ex.task}, {"response", ex.response}, {"embedding", ex.embedding}};
    out << rec.dump() << '\n';
  }
}

CorpusIndex read_index(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t line_no = 1;
  auto fail = [&](const std::string& what) -> Error {
    return Error(ErrorCode::parse, "corrupt index " + where(source_name, line_no) + ": " + what);
  };
  if (!std::getline(in, line)) throw Error(ErrorCode::parse, "index " + source_name + " is empty");
  std::size_t dimension = 0;
  std::size_t count = 0;
  try {
    const json h = json::parse(line);
    if (h.value("format", "") != kIndexFormat) throw fail("missing index header");
    if (h.at("version").get<int>() != kIndexVersion) throw fail("unsupported index version");
    dimension = h.at("dimension").get<std::size_t>();
    count = h.at("count").get<std::size_t>();
  } catch (const json::exception& e) {
    throw fail(e.what());
  }
  if (dimension == 0) throw fail("dimension must be positive");

  CorpusIndex index(dimension);
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      CorpusExample ex;
      ex.id = j.at("id").get<std::string>();
      ex.task = j.at("task").get<std::string>();
      ex.response = j.at("response").get<std::string>();
      ex.embedding = j.at("embedding").get<std::vector<double>>();
      index.add(std::move(ex));
    } catch (const json::exception& e) {
      throw fail(e.what());
    } catch (const Error& e) {
      throw fail(e.what());
    }
  }
  if (index.size() != count)
    throw Error(ErrorCode::parse, "index " + source_name + " declares " + std::to_string(count) + " records but has " +
                                      std::to_string(index.size()));
  return index;
}

CorpusIndex load_corpus_index(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open corpus index '" + path + "'");
  return read_index(in, path);
}

IndexBuildReport build_index(const std::string& corpus_path, EmbedBackend& embedder, const std::string& out_path,
                             const IndexBuildOptions& options) {
  if (options.batch_size == 0) throw Error(ErrorCode::invalid_argument, "batch size must be positive");
  std::ifstream in(corpus_path);
  if (!in) throw Error(ErrorCode::io, "cannot open corpus '" + corpus_path + "'");
  auto corpus = read_corpus(in, corpus_path, options.strict);
  if (corpus.records.empty()) throw Error(ErrorCode::parse, "corpus " + corpus_path + " has no usable records");

  std::vector<std::vector<double>> embeddings;
  embeddings.reserve(corpus.records.size());
  for (std::size_t start = 0; start < corpus.records.size(); start += options.batch_size) {
    const auto end = std::min(start + options.batch_size, corpus.records.size());
    std::vector<std::string> batch;
    for (auto i = start; i < end; ++i) batch.push_back(corpus.records[i].task);
    auto vecs = embedder.embed(batch);
    if (vecs.size() != batch.size())
      throw BackendError("embedder returned " + std::to_string(vecs.size()) + " vectors for a batch of " +
                             std::to_string(batch.size()),
                         false);
    for (auto& v : vecs) embeddings.push_back(std::move(v));
  }

  CorpusIndex index(embeddings.front().size());
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    auto& r = corpus.records[i];
    try {
      index.add({r.id, r.task, r.response, std::move(embeddings[i])});
    } catch (const Error& e) {
      throw Error(e.code(), "corpus line " + where(corpus_path, r.line) + ": " + e.what());
    }
  }

  const std::filesystem::path target(out_path);
  std::filesystem::path tmp = target;
  tmp += ".partial";
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::io, "cannot write '" + tmp.string() + "'");
      write_index(out, index);
      out.flush();
      if (!out) throw Error(ErrorCode::io, "write failed on '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, target);
  } catch (const std::filesystem::filesystem_error& e) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw Error(ErrorCode::io, e.what());
  } catch (...) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw;
  }

  return {index.size(), index.dimension(), std::move(corpus.skipped)};
}

}  // namespace tsearch
