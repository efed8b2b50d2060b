#include "tsearch/initializer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <unordered_set>

#include "text_util.hpp"
#include "tsearch/errors.hpp"
#include "tsearch/prompts.hpp"
#include "tsearch/rng.hpp"

namespace tsearch {

CorpusIndex::CorpusIndex(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw Error(ErrorCode::shape, "corpus index dimension must be positive");
}

void CorpusIndex::add(CorpusExample example) {
  if (text::trim(example.task).empty())
    throw Error(ErrorCode::invalid_argument, "corpus example '" + example.id + "' has an empty task");
  if (example.id.empty()) throw Error(ErrorCode::invalid_argument, "corpus example has an empty id");
  if (example.embedding.size() != dimension_)
    throw Error(ErrorCode::shape, "corpus example '" + example.id + "' has dimension " +
                                      std::to_string(example.embedding.size()) + ", index expects " +
                                      std::to_string(dimension_));
  double sq = 0.0;
  for (double x : example.embedding) {
    if (!std::isfinite(x)) throw Error(ErrorCode::shape, "corpus example '" + example.id + "' has a non-finite embedding");
    sq += x * x;
  }
  if (sq == 0.0) throw Error(ErrorCode::shape, "corpus example '" + example.id + "' has a zero embedding");
  for (const auto& e : examples_) {
    if (e.id == example.id) throw Error(ErrorCode::invalid_argument, "duplicate corpus id '" + example.id + "'");
  }
  norms_.push_back(std::sqrt(sq));
  examples_.push_back(std::move(example));
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::shape, "cosine similarity of vectors with different lengths");
  double dot = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) throw Error(ErrorCode::shape, "cosine similarity of a zero vector");
  return dot / (std::sqrt(aa) * std::sqrt(bb));
}

std::vector<ScoredExample> retrieve_similar(const CorpusIndex& index, std::span<const double> query_embedding,
                                            std::size_t k) {
  if (k == 0) throw Error(ErrorCode::invalid_argument, "retrieval k must be >= 1");
  if (index.empty()) throw Error(ErrorCode::empty_index, "corpus index is empty");
  if (query_embedding.size() != index.dimension())
    throw Error(ErrorCode::shape, "query embedding has dimension " + std::to_string(query_embedding.size()) +
                                      ", index expects " + std::to_string(index.dimension()));
  double qq = 0.0;
  for (double x : query_embedding) qq += x * x;
  if (qq == 0.0) throw Error(ErrorCode::shape, "query embedding is a zero vector");
  const double qnorm = std::sqrt(qq);

  const auto& examples = index.examples();
  std::vector<ScoredExample> scored;
  scored.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    double dot = 0.0;
    const auto& v = examples[i].embedding;
    for (std::size_t d = 0; d < v.size(); ++d) dot += v[d] * query_embedding[d];
    scored.push_back({&examples[i], dot / (index.norm(i) * qnorm)});
  }
  const auto keep = std::min(k, scored.size());
  auto better = [](const ScoredExample& a, const ScoredExample& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.example->id < b.example->id;
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), better);
  scored.resize(keep);
  return scored;
}

namespace {

enum class Label { none, persona, abstract, question };

// Strips list markers, numbering, headings and emphasis ahead of a label.
std::string_view strip_line_prefix(std::string_view line) {
  line = text::trim(line);
  bool changed = true;
  while (changed && !line.empty()) {
    changed = false;
    const char c = line.front();
    if (c == '-' || c == '*' || c == '#' || c == '>' || c == '_') {
      line.remove_prefix(1);
      changed = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t i = 0;
      while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
      if (i < line.size() && (line[i] == '.' || line[i] == ')')) {
        line.remove_prefix(i + 1);
        changed = true;
      }
    } else if (line.substr(0, 3) == "\xE2\x80\xA2") {  // bullet
      line.remove_prefix(3);
      changed = true;
    }
    line = text::trim(line);
  }
  return line;
}

// Matches `name` followed by optional emphasis and a colon; returns the text
// after the colon.
std::optional<std::string_view> match_label(std::string_view line, std::string_view name) {
  if (!text::istarts_with(line, name)) return std::nullopt;
  auto rest = line.substr(name.size());
  while (!rest.empty() && (rest.front() == '*' || rest.front() == '_' || rest.front() == ' ')) rest.remove_prefix(1);
  if (rest.empty() || rest.front() != ':') return std::nullopt;
  rest.remove_prefix(1);
  while (!rest.empty() && (rest.front() == '*' || rest.front() == '_')) rest.remove_prefix(1);
  return text::trim(rest);
}

std::pair<Label, std::string_view> classify(std::string_view raw) {
  const auto line = strip_line_prefix(raw);
  if (auto v = match_label(line, "persona")) return {Label::persona, *v};
  for (auto name : {"high-level abstract", "high level abstract"}) {
    if (auto v = match_label(line, name)) return {Label::abstract, *v};
  }
  if (auto v = match_label(line, "question")) return {Label::question, *v};
  return {Label::none, text::trim(raw)};
}

std::string clean_field(const std::string& s) {
  std::string out = text::collapse_whitespace(s);
  while (!out.empty() && (out.back() == '*' || out.back() == '_')) out.pop_back();
  return std::string(text::trim(out));
}

}  // namespace

std::vector<MetaThought> parse_thought_list(std::string_view input) {
  std::vector<MetaThought> out;
  std::string mindset, strategy;
  bool open = false;
  std::string* field = nullptr;

  auto finish = [&] {
    if (open) {
      MetaThought t;
      t.mindset = clean_field(mindset);
      t.strategy = clean_field(strategy);
      if (!t.mindset.empty() && !t.strategy.empty()) out.push_back(std::move(t));
    }
    mindset.clear();
    strategy.clear();
    open = false;
    field = nullptr;
  };

  std::size_t pos = 0;
  while (pos <= input.size()) {
    auto nl = input.find('\n', pos);
    if (nl == std::string_view::npos) nl = input.size();
    const auto raw = input.substr(pos, nl - pos);
    pos = nl + 1;

    const auto [label, value] = classify(raw);
    switch (label) {
      case Label::persona:
        finish();
        open = true;
        mindset = value;
        field = &mindset;
        // Both labels on one line.
        if (const auto at = text::to_lower(value).find("high-level abstract:"); at != std::string::npos) {
          mindset = value.substr(0, at);
          strategy = text::trim(value.substr(at + std::string_view("high-level abstract:").size()));
          field = &strategy;
        }
        break;
      case Label::abstract:
        if (!open || !strategy.empty()) {
          finish();
          open = true;
        }
        strategy = value;
        field = &strategy;
        break;
      case Label::question:
        finish();
        break;
      case Label::none:
        if (value.empty()) {
          field = nullptr;
        } else if (field != nullptr) {
          *field += ' ';
          *field += value;
        }
        break;
    }
  }
  finish();
  return out;
}

std::string serialize_thought_list(std::span<const MetaThought> thoughts) {
  std::string out;
  for (std::size_t i = 0; i < thoughts.size(); ++i) {
    out += std::to_string(i + 1) + ". Persona: " + text::collapse_whitespace(thoughts[i].mindset) + "\n";
    out += "High-level abstract: " + text::collapse_whitespace(thoughts[i].strategy) + "\n\n";
  }
  return out;
}

namespace {

// One request plus one format re-prompt. Returns the parsed thoughts (capped
// at n) and the raw replies.
std::vector<MetaThought> request_thoughts(ChatBackend& chat, const std::string& prompt, int n,
                                          const CallSettings& settings, std::vector<std::string>* raw = nullptr) {
  ChatRequest request;
  request.messages = {{"user", prompt}};
  request.temperature = settings.temperature;
  request.max_tokens = settings.max_tokens;
  request.model_name = settings.model_name;
  request.seed = settings.seed;

  for (int round = 0; round < 2; ++round) {
    const std::string reply = chat.complete(request);
    if (raw) raw->push_back(reply);
    auto thoughts = parse_thought_list(reply);
    if (!thoughts.empty()) {
      if (thoughts.size() > static_cast<std::size_t>(n)) thoughts.resize(static_cast<std::size_t>(n));
      return thoughts;
    }
    request.messages = prompts::with_reminder(request.messages, reply, n);
    if (request.seed) request.seed = mix64(*request.seed);
  }
  return {};
}

}  // namespace

std::vector<MetaThought> self_compose(ChatBackend& chat, std::string_view query, int n_self,
                                      const CallSettings& settings) {
  if (n_self < 1) throw Error(ErrorCode::invalid_argument, "n_self must be >= 1");
  auto thoughts = request_thoughts(chat, prompts::self_compose(query, n_self), n_self, settings);
  if (thoughts.empty())
    throw Error(ErrorCode::initialization, "self-composition produced no parseable meta-thoughts");
  for (std::size_t i = 0; i < thoughts.size(); ++i) {
    thoughts[i].id = "s" + std::to_string(i + 1);
    thoughts[i].origin = OriginKind::self_composed;
    thoughts[i].generation = 0;
  }
  return thoughts;
}

std::vector<MetaThought> derive_from_examples(ChatBackend& chat, std::string_view query,
                                              std::span<const CorpusExample> examples, int n_derived,
                                              const CallSettings& settings) {
  if (examples.empty()) throw Error(ErrorCode::invalid_argument, "derivation needs at least one example");
  if (n_derived < 1) throw Error(ErrorCode::invalid_argument, "n_derived must be >= 1");
  auto thoughts = request_thoughts(chat, prompts::derive(query, examples, n_derived), n_derived, settings);
  for (std::size_t i = 0; i < thoughts.size(); ++i) {
    thoughts[i].id = "d" + std::to_string(i + 1);
    thoughts[i].origin = OriginKind::corpus_derived;
    thoughts[i].generation = 0;
  }
  return thoughts;
}

PoolInit initialize_pool(ChatBackend& chat, EmbedBackend* embed, const CorpusIndex* index,
                         std::string_view query, const SearchConfig& config, const std::string& model_name) {
  if (config.n_self < 1) throw Error(ErrorCode::config, "n_self must be >= 1");
  if (config.retrieval_k < 1) throw Error(ErrorCode::config, "retrieval_k must be >= 1");

  CallSettings settings;
  settings.temperature = config.init_temperature;
  settings.max_tokens = config.max_tokens;
  settings.model_name = model_name;
  settings.seed = substream(config.seed, "init:self-compose");

  PoolInit init;
  auto self = self_compose(chat, query, config.n_self, settings);
  init.self_composed = self.size();

  std::vector<MetaThought> derived;
  if (index == nullptr) {
    init.notes.push_back("no corpus index configured; pool is self-composed only");
  } else {
    if (embed == nullptr) throw Error(ErrorCode::config, "a corpus index requires an embedding backend");
    const std::vector<std::string> texts{std::string(query)};
    const auto vectors = embed->embed(texts);
    if (vectors.size() != 1) throw BackendError("embedding backend returned a wrong batch size", false);
    const auto hits = retrieve_similar(*index, vectors.front(), static_cast<std::size_t>(config.retrieval_k));
    std::vector<CorpusExample> examples;
    for (const auto& h : hits) {
      init.retrieved_ids.push_back(h.example->id);
      examples.push_back(*h.example);
    }
    settings.seed = substream(config.seed, "init:derive");
    derived = derive_from_examples(chat, query, examples, config.n_derived, settings);
    init.corpus_used = true;
    init.derived = derived.size();
    if (derived.empty()) init.notes.push_back("corpus derivation produced no parseable meta-thoughts");
  }

  for (auto& t : self) {
    MetaThought copy = t;
    if (!init.pool.add(std::move(t))) init.duplicates.push_back(std::move(copy));
  }
  for (auto& t : derived) {
    MetaThought copy = t;
    if (!init.pool.add(std::move(t))) init.duplicates.push_back(std::move(copy));
  }
  if (init.pool.empty()) throw Error(ErrorCode::initialization, "initial meta-thought pool is empty");
  return init;
}

}  // namespace tsearch
