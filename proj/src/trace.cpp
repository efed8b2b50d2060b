#include "tsearch/trace.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include "text_util.hpp"
#include "tsearch/errors.hpp"
#include "tsearch/rng.hpp"

namespace tsearch {

using nlohmann::json;

Clock system_clock_ms() {
  return [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
}

Clock fixed_clock(std::int64_t value) {
  return [value] { return value; };
}

std::string make_run_id(const std::string& query, const SearchConfig& config, std::size_t index) {
  const std::string material = fingerprint(config) + "|" + std::to_string(index) + "|" + query;
  return "run-" + text::sha256_hex(material).substr(0, 12);
}

json to_json(const SearchConfig& c) {
  return {
      {"budget", c.budget},
      {"interval", c.interval},
      {"beta", c.beta},
      {"n_self", c.n_self},
      {"n_derived", c.n_derived},
      {"retrieval_k", c.retrieval_k},
      {"n_parents", c.n_parents},
      {"n_children", c.n_children},
      {"temperature", c.temperature},
      {"init_temperature", c.init_temperature},
      {"max_tokens", c.max_tokens},
      {"seed", c.seed},
      {"squash_rewards", c.squash_rewards},
  };
}

SearchConfig search_config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::config, "search configuration must be an object");
  SearchConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "budget") c.budget = value.get<int>();
      else if (key == "interval") c.interval = value.get<int>();
      else if (key == "beta") c.beta = value.get<double>();
      else if (key == "n_self") c.n_self = value.get<int>();
      else if (key == "n_derived") c.n_derived = value.get<int>();
      else if (key == "retrieval_k") c.retrieval_k = value.get<int>();
      else if (key == "n_parents") c.n_parents = value.get<int>();
      else if (key == "n_children") c.n_children = value.get<int>();
      else if (key == "temperature") c.temperature = value.get<double>();
      else if (key == "init_temperature") c.init_temperature = value.get<double>();
      else if (key == "max_tokens") c.max_tokens = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "squash_rewards") c.squash_rewards = value.get<bool>();
      else throw Error(ErrorCode::config, "unknown search key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config, std::string("bad search value: ") + e.what());
  }
  validate(c);
  return c;
}

json to_json(const MetaThought& t) {
  return {{"id", t.id},
          {"mindset", t.mindset},
          {"strategy", t.strategy},
          {"generation", t.generation},
          {"origin", to_string(t.origin)},
          {"parent_ids", t.parent_ids}};
}

MetaThought thought_from_json(const json& j) {
  MetaThought t;
  t.id = j.at("id").get<std::string>();
  t.mindset = j.at("mindset").get<std::string>();
  t.strategy = j.at("strategy").get<std::string>();
  t.generation = j.at("generation").get<int>();
  t.origin = origin_from_string(j.at("origin").get<std::string>());
  t.parent_ids = j.at("parent_ids").get<std::vector<std::string>>();
  return t;
}

namespace {

json score_to_json(double score) {
  if (std::isinf(score) && score > 0) return "inf";
  return score;
}

double score_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw Error(ErrorCode::parse, "unexpected UCB score string");
  }
  return j.get<double>();
}

json messages_to_json(const Messages& messages) {
  json out = json::array();
  for (const auto& m : messages) out.push_back({{"role", m.role}, {"content", m.content}});
  return out;
}

Messages messages_from_json(const json& j) {
  Messages out;
  for (const auto& m : j) out.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
  return out;
}

json thoughts_to_json(const std::vector<MetaThought>& thoughts) {
  json out = json::array();
  for (const auto& t : thoughts) out.push_back(to_json(t));
  return out;
}

std::vector<MetaThought> thoughts_from_json(const json& j) {
  std::vector<MetaThought> out;
  for (const auto& t : j) out.push_back(thought_from_json(t));
  return out;
}

}  // namespace

TraceWriter::TraceWriter(std::ostream& out, std::string run_id, TraceOptions options)
    : out_(out), run_id_(std::move(run_id)), options_(std::move(options)) {
  if (!options_.clock) options_.clock = system_clock_ms();
}

void TraceWriter::emit(json record) {
  record["run_id"] = run_id_;
  record["ts_ms"] = options_.clock();
  out_ << record.dump() << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorCode::io, "failed writing trace record");
}

void TraceWriter::on_pool_init(const SearchTrace& trace) {
  init_written_ = true;
  emit({{"record_kind", "pool_init"},
        {"query", trace.query},
        {"config", to_json(trace.config)},
        {"config_fingerprint", trace.config_fingerprint},
        {"prompt_version", trace.prompt_version},
        {"redacted", options_.redact},
        {"thoughts", thoughts_to_json(trace.init.thoughts)},
        {"duplicates", thoughts_to_json(trace.init.duplicates)},
        {"retrieved_ids", trace.init.retrieved_ids},
        {"corpus_used", trace.init.corpus_used},
        {"notes", trace.init.notes}});
}

void TraceWriter::on_attempt(const SearchTrace&, const Attempt& a) {
  json snapshot = json::array();
  for (const auto& e : a.ucb_snapshot) snapshot.push_back({{"thought_id", e.thought_id}, {"score", score_to_json(e.score)}});
  json record = {{"record_kind", "attempt"},
                 {"step", a.step},
                 {"thought_id", a.thought_id},
                 {"thought_generation", a.thought_generation},
                 {"reward", a.reward},
                 {"bandit_reward", a.bandit_reward},
                 {"response_digest", text::sha256_hex(a.response)},
                 {"prompt", messages_to_json(a.prompt)},
                 {"ucb_snapshot", std::move(snapshot)}};
  if (!options_.redact) record["response"] = a.response;
  emit(std::move(record));
}

void TraceWriter::on_evolution(const SearchTrace&, const EvolutionEvent& ev) {
  json children = json::array();
  for (const auto& c : ev.children) {
    json child = to_json(c.thought);
    child["added"] = c.added;
    children.push_back(std::move(child));
  }
  emit({{"record_kind", "evolution"},
        {"step", ev.step},
        {"generation", ev.generation},
        {"parent_ids", ev.parent_ids},
        {"children", std::move(children)},
        {"raw_outputs", ev.raw_outputs}});
}

void TraceWriter::on_complete(const SearchTrace& trace, const Attempt& best) {
  emit({{"record_kind", "run_summary"},
        {"status", "completed"},
        {"attempts", trace.attempts.size()},
        {"best_step", best.step},
        {"best_reward", best.reward},
        {"best_thought_id", best.thought_id},
        {"error", ""}});
}

void TraceWriter::on_abort(const SearchTrace& trace, const std::string& reason) {
  if (!init_written_ && trace.init.thoughts.empty()) {
    write_failed_summary(reason);
    return;
  }
  json record = {{"record_kind", "run_summary"}, {"status", "aborted"}, {"attempts", trace.attempts.size()},
                 {"error", reason}};
  if (!trace.attempts.empty()) {
    const auto& best = best_attempt(trace);
    record["best_step"] = best.step;
    record["best_reward"] = best.reward;
    record["best_thought_id"] = best.thought_id;
  } else {
    record["best_step"] = nullptr;
  }
  emit(std::move(record));
}

void TraceWriter::write_failed_summary(const std::string& reason) {
  emit({{"record_kind", "run_summary"}, {"status", "aborted"}, {"attempts", 0}, {"best_step", nullptr},
        {"error", reason}});
}

std::vector<RunTrace> read_traces(std::istream& in, const std::string& source_name) {
  std::vector<RunTrace> runs;
  std::map<std::string, std::size_t> by_id;
  std::set<std::string> summarized;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = source_name + ":" + std::to_string(line_no);
    try {
      const json r = json::parse(line);
      const auto kind = r.at("record_kind").get<std::string>();
      const auto run_id = r.at("run_id").get<std::string>();
      auto [it, fresh] = by_id.emplace(run_id, runs.size());
      if (fresh) {
        runs.emplace_back();
        runs.back().run_id = run_id;
      }
      RunTrace& run = runs[it->second];
      if (summarized.count(run_id)) throw Error(ErrorCode::parse, "record after run_summary");

      if (kind == "pool_init") {
        if (!fresh) throw Error(ErrorCode::parse, "pool_init is not the first record of its run");
        auto& t = run.trace;
        t.query = r.at("query").get<std::string>();
        t.config = search_config_from_json(r.at("config"));
        t.config_fingerprint = r.at("config_fingerprint").get<std::string>();
        t.prompt_version = r.at("prompt_version").get<std::string>();
        run.redacted = r.at("redacted").get<bool>();
        t.init.thoughts = thoughts_from_json(r.at("thoughts"));
        t.init.duplicates = thoughts_from_json(r.at("duplicates"));
        t.init.retrieved_ids = r.at("retrieved_ids").get<std::vector<std::string>>();
        t.init.corpus_used = r.at("corpus_used").get<bool>();
        t.init.notes = r.at("notes").get<std::vector<std::string>>();
      } else if (kind == "attempt") {
        if (fresh) throw Error(ErrorCode::parse, "attempt record before pool_init");
        Attempt a;
        a.step = r.at("step").get<int>();
        const int expected = run.trace.attempts.empty() ? 0 : run.trace.attempts.back().step;
        if (a.step <= expected) throw Error(ErrorCode::parse, "attempt steps are not strictly increasing");
        a.thought_id = r.at("thought_id").get<std::string>();
        a.thought_generation = r.at("thought_generation").get<int>();
        a.reward = r.at("reward").get<double>();
        a.bandit_reward = r.at("bandit_reward").get<double>();
        a.prompt = messages_from_json(r.at("prompt"));
        for (const auto& e : r.at("ucb_snapshot"))
          a.ucb_snapshot.push_back({e.at("thought_id").get<std::string>(), score_from_json(e.at("score"))});
        if (r.contains("response")) {
          a.response = r.at("response").get<std::string>();
          if (text::sha256_hex(a.response) != r.at("response_digest").get<std::string>())
            throw Error(ErrorCode::parse, "response does not match its digest");
        }
        run.trace.attempts.push_back(std::move(a));
      } else if (kind == "evolution") {
        if (fresh) throw Error(ErrorCode::parse, "evolution record before pool_init");
        EvolutionEvent ev;
        ev.step = r.at("step").get<int>();
        ev.generation = r.at("generation").get<int>();
        ev.parent_ids = r.at("parent_ids").get<std::vector<std::string>>();
        for (const auto& c : r.at("children")) ev.children.push_back({thought_from_json(c), c.at("added").get<bool>()});
        ev.raw_outputs = r.at("raw_outputs").get<std::vector<std::string>>();
        run.trace.evolution_events.push_back(std::move(ev));
      } else if (kind == "run_summary") {
        run.status = r.at("status").get<std::string>();
        if (run.status != "completed" && run.status != "aborted")
          throw Error(ErrorCode::parse, "unknown run status '" + run.status + "'");
        if (r.at("attempts").get<std::size_t>() != run.trace.attempts.size())
          throw Error(ErrorCode::parse, "run_summary attempt count disagrees with the attempt records");
        if (r.contains("best_step") && !r.at("best_step").is_null()) run.best_step = r.at("best_step").get<int>();
        run.error = r.value("error", "");
        summarized.insert(run_id);
      } else {
        throw Error(ErrorCode::parse, "unknown record_kind '" + kind + "'");
      }
    } catch (const Error& e) {
      throw Error(ErrorCode::parse, "corrupt trace record at " + where + ": " + e.what());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::parse, "corrupt trace record at " + where + ": " + e.what());
    }
  }
  return runs;
}

std::vector<RunTrace> read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open trace file '" + path + "'");
  return read_traces(in, path);
}

}  // namespace tsearch
