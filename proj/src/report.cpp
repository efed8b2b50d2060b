#include "tsearch/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "tsearch/errors.hpp"

namespace tsearch {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

int bucket_of(double reward, double lo, double hi) {
  if (!(hi > lo)) return 0;
  const int b = static_cast<int>(std::floor((reward - lo) / (hi - lo) * kRewardBuckets));
  return std::clamp(b, 0, kRewardBuckets - 1);
}

}  // namespace

Report build_report(std::span<const RunTrace> runs) {
  Report report;
  report.runs = runs.size();
  bool first = true;
  for (const auto& run : runs) {
    for (const auto& a : run.trace.attempts) {
      report.reward_min = first ? a.reward : std::min(report.reward_min, a.reward);
      report.reward_max = first ? a.reward : std::max(report.reward_max, a.reward);
      first = false;
      ++report.attempts;
    }
  }
  if (report.attempts == 0) throw Error(ErrorCode::invalid_argument, "traces contain no attempts to report on");

  std::map<int, std::size_t> gen_counts;
  std::map<std::pair<int, int>, std::size_t> bucket_counts;
  for (const auto& run : runs) {
    bool started = false;
    double best = 0.0;
    for (const auto& a : run.trace.attempts) {
      ++gen_counts[a.thought_generation];
      ++bucket_counts[{a.thought_generation, bucket_of(a.reward, report.reward_min, report.reward_max)}];
      best = started ? std::max(best, a.reward) : a.reward;
      started = true;
      report.curve.push_back({run.run_id, a.step, a.reward, best});
    }
  }

  const double total = static_cast<double>(report.attempts);
  for (const auto& [gen, count] : gen_counts) report.by_generation.push_back({gen, count, count / total});
  const double width = (report.reward_max - report.reward_min) / kRewardBuckets;
  for (const auto& [key, count] : bucket_counts) {
    const auto [gen, bucket] = key;
    BucketShare row;
    row.generation = gen;
    row.bucket = bucket;
    row.lower = report.reward_min + width * bucket;
    row.upper = bucket == kRewardBuckets - 1 ? report.reward_max : report.reward_min + width * (bucket + 1);
    row.selections = count;
    row.share = count / total;
    report.by_bucket.push_back(row);
  }
  return report;
}

void write_generation_csv(std::ostream& out, const Report& report) {
  out << "generation,selections,share\n";
  for (const auto& r : report.by_generation) out << r.generation << ',' << r.selections << ',' << num(r.share) << '\n';
}

void write_bucket_csv(std::ostream& out, const Report& report) {
  out << "generation,bucket,reward_lower,reward_upper,selections,share\n";
  for (const auto& r : report.by_bucket) {
    out << r.generation << ',' << r.bucket << ',' << num(r.lower) << ',' << num(r.upper) << ',' << r.selections << ','
        << num(r.share) << '\n';
  }
}

void write_curve_csv(std::ostream& out, const Report& report) {
  out << "run_id,step,reward,best_so_far\n";
  for (const auto& p : report.curve)
    out << p.run_id << ',' << p.step << ',' << num(p.reward) << ',' << num(p.best_so_far) << '\n';
}

}  // namespace tsearch
