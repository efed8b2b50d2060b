#pragma once

// Corpus ingestion and the on-disk index format.
//
// Corpus: one JSON object per line, {"task", "response"[, "id"]}. Blank lines
// are ignored. Lines without an id get their 1-based line number, zero-padded
// to six digits.
//
// Index: a header line
//   {"format":"tsearch-corpus-index","version":1,"dimension":D,"count":N}
// followed by N lines {"id","task","response","embedding":[...]}.

#include <iosfwd>
#include <string>
#include <vector>

#include "tsearch/backends.hpp"
#include "tsearch/initializer.hpp"

namespace tsearch {

struct CorpusRecord {
  std::string id;
  std::string task;
  std::string response;
  std::size_t line = 0;
};

struct CorpusReadResult {
  std::vector<CorpusRecord> records;
  std::vector<std::string> skipped;  // "file:line: reason", non-strict mode only
};

// Strict mode throws Error(parse) naming the first malformed line.
CorpusReadResult read_corpus(std::istream& in, const std::string& source_name, bool strict);

void write_index(std::ostream& out, const CorpusIndex& index);
CorpusIndex read_index(std::istream& in, const std::string& source_name);
CorpusIndex load_corpus_index(const std::string& path);

struct IndexBuildOptions {
  bool strict = true;
  std::size_t batch_size = 32;
};

struct IndexBuildReport {
  std::size_t records = 0;
  std::size_t dimension = 0;
  std::vector<std::string> skipped;
};

// Embeds every task and writes the index atomically: the output appears only
// once complete, and a failure leaves no partial file behind.
IndexBuildReport build_index(const std::string& corpus_path, EmbedBackend& embedder, const std::string& out_path,
                             const IndexBuildOptions& options = {});

}  // namespace tsearch
