#pragma once

// Aggregates over recorded traces: how selections split across thought
// generations (overall and per reward bucket), and best-reward-so-far curves.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tsearch/trace.hpp"

namespace tsearch {

inline constexpr int kRewardBuckets = 10;

struct GenerationShare {
  int generation = 0;
  std::size_t selections = 0;
  double share = 0.0;  // of all selections in the report
};

struct BucketShare {
  int generation = 0;
  int bucket = 0;  // 0..kRewardBuckets-1 over [reward_min, reward_max]
  double lower = 0.0;
  double upper = 0.0;
  std::size_t selections = 0;
  double share = 0.0;
};

struct CurvePoint {
  std::string run_id;
  int step = 0;
  double reward = 0.0;
  double best_so_far = 0.0;
};

struct Report {
  std::size_t runs = 0;
  std::size_t attempts = 0;
  double reward_min = 0.0;
  double reward_max = 0.0;
  std::vector<GenerationShare> by_generation;  // ascending generation
  std::vector<BucketShare> by_bucket;          // non-empty cells, by generation then bucket
  std::vector<CurvePoint> curve;               // per run in input order, steps ascending
};

// Attempts are bucketed by their raw reward.
Report build_report(std::span<const RunTrace> runs);

void write_generation_csv(std::ostream& out, const Report& report);
void write_bucket_csv(std::ostream& out, const Report& report);
void write_curve_csv(std::ostream& out, const Report& report);

}  // namespace tsearch
