#include "advicelab/harness/output.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "advicelab/harness/experiment.hpp"

namespace advicelab::harness {

using nlohmann::json;

OutputError::OutputError(const std::string& path, const std::string& what)
    : std::runtime_error(path + ": " + what), path_(path) {}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError(path, "cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw OutputError(path, "write failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw OutputError(path, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_records_csv(std::span<const EpisodeRecord> records) {
  std::string out = kRecordsHeader;
  out += '\n';
  char line[160];
  for (const auto& r : records) {
    std::snprintf(line, sizeof line, "%d,%d,%.1f,%d,%d,%d,%d\n", r.session, r.episode, r.score, r.steps,
                  r.advice_offered, r.advice_used, r.reached_goal ? 1 : 0);
    out += line;
  }
  return out;
}

std::vector<EpisodeRecord> parse_records_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kRecordsHeader) {
    throw std::invalid_argument("records csv: unexpected header");
  }
  std::vector<EpisodeRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    EpisodeRecord r;
    int goal = 0;
    int consumed = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%d,%d,%d,%d%n", &r.session, &r.episode, &r.score, &r.steps,
                    &r.advice_offered, &r.advice_used, &goal, &consumed) != 7 ||
        consumed != static_cast<int>(line.size())) {
      throw std::invalid_argument("records csv: malformed line " + std::to_string(lineno));
    }
    r.reached_goal = goal != 0;
    out.push_back(r);
  }
  return out;
}

void write_records_csv(const std::string& path, std::span<const EpisodeRecord> records) {
  write_text_file(path, format_records_csv(records));
}

std::vector<EpisodeRecord> read_records_csv(const std::string& path) {
  return parse_records_csv(read_text_file(path));
}

std::string format_heatmap_csv(const VisitHeatmap& heat) {
  std::string out;
  for (int y = 0; y < heat.height(); ++y) {
    for (int x = 0; x < heat.width(); ++x) {
      if (x) out += ',';
      out += std::to_string(heat.at(x, y));
    }
    out += '\n';
  }
  return out;
}

VisitHeatmap parse_heatmap_csv(const std::string& text) {
  std::vector<std::vector<std::int64_t>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::int64_t> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      std::size_t used = 0;
      long long v = std::stoll(cell, &used);
      if (used != cell.size() || v < 0) throw std::invalid_argument("heatmap csv: bad count '" + cell + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::invalid_argument("heatmap csv: ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty()) throw std::invalid_argument("heatmap csv: empty");
  VisitHeatmap heat(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()));
  for (int y = 0; y < heat.height(); ++y) {
    for (int x = 0; x < heat.width(); ++x) heat.add({x, y}, rows[y][x]);
  }
  return heat;
}

void write_heatmap_csv(const std::string& path, const VisitHeatmap& heat) {
  write_text_file(path, format_heatmap_csv(heat));
}

VisitHeatmap read_heatmap_csv(const std::string& path) { return parse_heatmap_csv(read_text_file(path)); }

ExperimentSummary summarize(const ExperimentConfig& cfg, const ExperimentResult& result) {
  ExperimentSummary s;
  s.agent = std::string(agents::to_string(cfg.agent));
  s.condition = std::string(oracle::to_string(cfg.condition));
  s.episodes = cfg.episodes;
  s.sessions = cfg.sessions;
  std::vector<double> scores, steps, offered, used, finals;
  double goals = 0;
  for (int i = 0; i < static_cast<int>(result.sessions.size()); ++i) {
    s.seeds.push_back(cfg.session_seed(i));
    const auto& recs = result.sessions[i].records;
    for (const auto& r : recs) {
      scores.push_back(r.score);
      steps.push_back(r.steps);
      offered.push_back(r.advice_offered);
      used.push_back(r.advice_used);
      goals += r.reached_goal ? 1 : 0;
    }
    s.episodes_to_stable_goal.push_back(episodes_to_stable_goal(recs));
    if (!recs.empty()) {
      auto sc = scores_of(recs);
      finals.push_back(moving_average(sc).back());
    }
  }
  s.mean_score = mean(scores);
  s.stddev_score = stddev(scores);
  s.mean_steps = mean(steps);
  s.goal_rate = scores.empty() ? 0.0 : goals / static_cast<double>(scores.size());
  s.mean_advice_offered = mean(offered);
  s.mean_advice_used = mean(used);
  s.final_moving_average = mean(finals);
  return s;
}

std::string format_summary_json(const ExperimentSummary& s) {
  json j;
  j["agent"] = s.agent;
  j["condition"] = s.condition;
  j["episodes"] = s.episodes;
  j["sessions"] = s.sessions;
  j["seeds"] = s.seeds;
  j["mean_score"] = s.mean_score;
  j["stddev_score"] = s.stddev_score;
  j["mean_steps"] = s.mean_steps;
  j["goal_rate"] = s.goal_rate;
  j["mean_advice_offered"] = s.mean_advice_offered;
  j["mean_advice_used"] = s.mean_advice_used;
  j["final_moving_average"] = s.final_moving_average;
  json conv = json::array();
  for (const auto& e : s.episodes_to_stable_goal) conv.push_back(e ? json(*e) : json(nullptr));
  j["episodes_to_stable_goal"] = conv;
  return j.dump(2) + "\n";
}

void write_summary_json(const std::string& path, const ExperimentSummary& summary) {
  write_text_file(path, format_summary_json(summary));
}

std::string format_kl_json(const std::string& p_label, const std::string& q_label, double kl_pq,
                           double kl_qp) {
  json j;
  j["p"] = p_label;
  j["q"] = q_label;
  j["kl_p_q"] = kl_pq;
  j["kl_q_p"] = kl_qp;
  return j.dump(2) + "\n";
}

std::string format_transfer_json(const TransferResult& result, int rotations) {
  json j;
  j["rotations"] = rotations;
  j["episodes"] = result.records.size();
  j["reference_score"] = result.reference_score;
  j["reconvergence_episode"] =
      result.reconvergence_episode ? json(*result.reconvergence_episode) : json(nullptr);
  auto scores = scores_of(result.records);
  j["final_moving_average"] = scores.empty() ? 0.0 : moving_average(scores).back();
  return j.dump(2) + "\n";
}

void write_checkpoint_meta(const std::string& checkpoint_path, double final_moving_average,
                           std::optional<int> converged_episode) {
  json j;
  j["final_moving_average"] = final_moving_average;
  j["converged_episode"] = converged_episode ? json(*converged_episode) : json(nullptr);
  write_text_file(checkpoint_path + ".meta.json", j.dump(2) + "\n");
}

double read_checkpoint_reference(const std::string& checkpoint_path) {
  const std::string path = checkpoint_path + ".meta.json";
  try {
    return json::parse(read_text_file(path)).at("final_moving_average").get<double>();
  } catch (const json::exception& e) {
    throw OutputError(path, e.what());
  }
}

}  // namespace advicelab::harness
