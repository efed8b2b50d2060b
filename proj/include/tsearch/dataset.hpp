#pragma once

// Query and evaluation datasets, one JSON object per line.
//
//   {"id": "q1", "query": "free-form request"}
//   {"id": "m1", "question": "...", "choices": ["opt A", "opt B", ...], "reference": "B"}
//   {"id": "g1", "question": "...", "reference": "42"}
//
// "id" is optional and defaults to the zero-padded line number. Choices are
// lettered A, B, ... in order.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tsearch/eval_harness.hpp"

namespace tsearch {

struct DatasetEntry {
  std::string id;
  std::string query;            // text handed to the search
  std::optional<EvalItem> item; // present for question records
};

std::vector<DatasetEntry> read_dataset(std::istream& in, const std::string& source_name);
std::vector<DatasetEntry> load_dataset(const std::string& path);

}  // namespace tsearch
