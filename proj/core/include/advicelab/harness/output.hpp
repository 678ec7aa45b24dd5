#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "advicelab/harness/metrics.hpp"

namespace advicelab::harness {

struct ExperimentConfig;
struct ExperimentResult;
struct TransferResult;

// I/O failure that names the offending path.
class OutputError : public std::runtime_error {
 public:
  OutputError(const std::string& path, const std::string& what);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

inline constexpr const char* kRecordsHeader =
    "session,episode,score,steps,advice_offered,advice_used,reached_goal";

// Scores are always multiples of 0.5, so one decimal is exact.
std::string format_records_csv(std::span<const EpisodeRecord> records);
std::vector<EpisodeRecord> parse_records_csv(const std::string& text);
void write_records_csv(const std::string& path, std::span<const EpisodeRecord> records);
std::vector<EpisodeRecord> read_records_csv(const std::string& path);

// One row per map row, comma-separated counts.
std::string format_heatmap_csv(const VisitHeatmap& heat);
VisitHeatmap parse_heatmap_csv(const std::string& text);
void write_heatmap_csv(const std::string& path, const VisitHeatmap& heat);
VisitHeatmap read_heatmap_csv(const std::string& path);

struct ExperimentSummary {
  std::string agent;
  std::string condition;
  int episodes = 0;
  int sessions = 0;
  std::vector<std::uint64_t> seeds;
  double mean_score = 0.0;
  double stddev_score = 0.0;
  double mean_steps = 0.0;
  double goal_rate = 0.0;
  double mean_advice_offered = 0.0;
  double mean_advice_used = 0.0;
  std::vector<std::optional<int>> episodes_to_stable_goal;
  double final_moving_average = 0.0;
};

ExperimentSummary summarize(const ExperimentConfig& cfg, const ExperimentResult& result);
std::string format_summary_json(const ExperimentSummary& summary);
void write_summary_json(const std::string& path, const ExperimentSummary& summary);

// KL report in both directions between two labelled heatmaps.
std::string format_kl_json(const std::string& p_label, const std::string& q_label, double kl_pq,
                           double kl_qp);

std::string format_transfer_json(const TransferResult& result, int rotations);

// Sidecar next to a checkpoint recording the first-phase plateau.
void write_checkpoint_meta(const std::string& checkpoint_path, double final_moving_average,
                           std::optional<int> converged_episode);
double read_checkpoint_reference(const std::string& checkpoint_path);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace advicelab::harness
