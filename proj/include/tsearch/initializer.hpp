#pragma once

// Initial pool construction: self-composed thoughts plus thinking patterns
// abstracted from retrieved corpus examples.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsearch/backends.hpp"
#include "tsearch/search_config.hpp"
#include "tsearch/thought_pool.hpp"

namespace tsearch {

struct CorpusExample {
  std::string id;
  std::string task;
  std::string response;
  std::vector<double> embedding;
};

class CorpusIndex {
 public:
  explicit CorpusIndex(std::size_t dimension);

  // Rejects empty tasks, wrong dimensions, zero vectors and duplicate ids.
  void add(CorpusExample example);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return examples_.size(); }
  bool empty() const noexcept { return examples_.empty(); }
  const std::vector<CorpusExample>& examples() const noexcept { return examples_; }
  double norm(std::size_t i) const { return norms_[i]; }

 private:
  std::size_t dimension_;
  std::vector<CorpusExample> examples_;
  std::vector<double> norms_;
};

struct ScoredExample {
  const CorpusExample* example;
  double similarity;
};

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Top min(k, size) examples by cosine similarity, descending; ties by
// ascending id. Full scan.
std::vector<ScoredExample> retrieve_similar(const CorpusIndex& index, std::span<const double> query_embedding,
                                            std::size_t k);

// Extracts "Persona:" / "High-level abstract:" blocks. Numbering, bullets
// and markdown emphasis around the labels are tolerated; blocks missing
// either field are dropped. Returned thoughts have no id yet.
std::vector<MetaThought> parse_thought_list(std::string_view text);
std::string serialize_thought_list(std::span<const MetaThought> thoughts);

struct CallSettings {
  double temperature = 0.6;
  int max_tokens = 1024;
  std::string model_name;
  std::uint64_t seed = 0;
};

// Returns 1..n_self thoughts with ids "s1", "s2", ... Re-prompts once on an
// unparseable reply, then throws Error(initialization).
std::vector<MetaThought> self_compose(ChatBackend& chat, std::string_view query, int n_self,
                                      const CallSettings& settings);

// Up to n_derived thoughts with ids "d1", "d2", ... An unparseable reply
// (after one re-prompt) yields an empty list.
std::vector<MetaThought> derive_from_examples(ChatBackend& chat, std::string_view query,
                                              std::span<const CorpusExample> examples, int n_derived,
                                              const CallSettings& settings);

struct PoolInit {
  ThoughtPool pool;
  std::vector<MetaThought> duplicates;  // candidates dropped by dedup
  std::size_t self_composed = 0;
  std::size_t derived = 0;
  std::vector<std::string> retrieved_ids;
  bool corpus_used = false;
  std::vector<std::string> notes;
};

// index may be null (self-composed thoughts only). embed must be non-null
// when index is.
PoolInit initialize_pool(ChatBackend& chat, EmbedBackend* embed, const CorpusIndex* index,
                         std::string_view query, const SearchConfig& config, const std::string& model_name = {});

}  // namespace tsearch
