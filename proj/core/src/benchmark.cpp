#include "noir/benchmark.hpp"

#include <cstdio>
#include <map>
#include <optional>
#include <ostream>

#include "noir/eeg_io.hpp"
#include "noir/error.hpp"
#include "noir/rng.hpp"

namespace noir {
namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Mode-level decoder identity: Noir2 and Noir2Learning share a pipeline.
int pipeline_of(ProtocolMode m) { return m == ProtocolMode::Noir1 ? 0 : 1; }

}  // namespace

double reduction_percent(double before, double after) {
  if (!(before > 0.0)) return 0.0;
  return 100.0 * (1.0 - after / before);
}

BenchmarkSummary run_benchmark(const ProtocolConfig& base, const std::vector<std::string>& tasks,
                               const std::vector<ProtocolMode>& modes, int n_seeds) {
  if (n_seeds < 1) fail(ErrorCode::ConfigInvalid, "n_seeds must be at least 1");
  if (tasks.empty() || modes.empty()) fail(ErrorCode::ConfigInvalid, "benchmark needs tasks and modes");
  base.validate();
  BenchmarkSummary out;
  std::map<int, Decoders> decoders;
  for (ProtocolMode m : modes) {
    if (decoders.count(pipeline_of(m))) continue;
    ProtocolConfig c = base;
    c.mode = m;
    decoders.emplace(pipeline_of(m), calibrate_decoders(c));
  }

  std::map<std::pair<std::string, ProtocolMode>, BenchmarkRow> cells;
  for (const auto& task_name : tasks) {
    ProtocolConfig tc = base;
    tc.task = task_name;
    TaskDefinition task = read_task_file(tc.task_path());
    if (base.jitter_xy) task.jitter_xy = *base.jitter_xy;

    std::optional<DemoSequence> demo;
    for (ProtocolMode m : modes) {
      ProtocolConfig c = tc;
      c.mode = m;
      if (m == ProtocolMode::Noir2Learning && !c.learning.oracle_accuracy && !demo) {
        demo = capture_demo(c, task, decoders.at(pipeline_of(m)));
      }
      BenchmarkRow row;
      row.task = task.id;
      row.mode = m;
      double succ = 0, time = 0, human = 0;
      for (int s = 0; s < n_seeds; ++s) {
        c.seed = derive_seed(base.seed, static_cast<std::uint64_t>(s) + 1);
        TrialContext ctx{&task, &decoders.at(pipeline_of(m)), demo ? &*demo : nullptr, nullptr};
        TrialReport r = run_trial(c, ctx);
        succ += r.success ? 1.0 : 0.0;
        time += r.total_time_s;
        human += r.human_time_s;
        row.identities_hold = row.identities_hold && r.time_identity_holds();
        out.reports.push_back(std::move(r));
      }
      row.trials = n_seeds;
      row.success_rate = succ / n_seeds;
      row.mean_time_s = time / n_seeds;
      row.mean_human_time_s = human / n_seeds;
      cells[{task.id, m}] = row;
      out.rows.push_back(row);
    }
  }

  auto noir1 = [&](const std::string& task) -> const BenchmarkRow* {
    const auto it = cells.find({task, ProtocolMode::Noir1});
    return it == cells.end() ? nullptr : &it->second;
  };
  for (auto& row : out.rows) {
    if (const BenchmarkRow* b = noir1(row.task); b && row.mode != ProtocolMode::Noir1) {
      row.time_reduction_pct = reduction_percent(b->mean_time_s, row.mean_time_s);
      row.reduction_pct = reduction_percent(b->mean_human_time_s, row.mean_human_time_s);
    }
  }
  // cross-task rows average the per-task means, then reduce
  std::vector<BenchmarkRow> all;
  for (ProtocolMode m : modes) {
    BenchmarkRow a;
    a.task = "ALL";
    a.mode = m;
    int n = 0;
    for (const auto& row : out.rows) {
      if (row.mode != m) continue;
      a.trials += row.trials;
      a.success_rate += row.success_rate;
      a.mean_time_s += row.mean_time_s;
      a.mean_human_time_s += row.mean_human_time_s;
      a.identities_hold = a.identities_hold && row.identities_hold;
      ++n;
    }
    a.success_rate /= n;
    a.mean_time_s /= n;
    a.mean_human_time_s /= n;
    all.push_back(a);
  }
  const BenchmarkRow* all1 = nullptr;
  for (const auto& a : all) {
    if (a.mode == ProtocolMode::Noir1) all1 = &a;
  }
  for (auto& a : all) {
    if (all1 && a.mode != ProtocolMode::Noir1) {
      a.time_reduction_pct = reduction_percent(all1->mean_time_s, a.mean_time_s);
      a.reduction_pct = reduction_percent(all1->mean_human_time_s, a.mean_human_time_s);
    }
  }
  out.rows.insert(out.rows.end(), all.begin(), all.end());
  return out;
}

void write_benchmark_csv(std::ostream& os, const BenchmarkSummary& s) {
  os << "task,mode,success_rate,mean_time_s,mean_human_time_s,reduction_pct\n";
  for (const auto& r : s.rows) {
    os << r.task << ',' << to_string(r.mode) << ',' << format_value(r.success_rate) << ','
       << format_value(r.mean_time_s) << ',' << format_value(r.mean_human_time_s) << ','
       << format_value(r.reduction_pct) << '\n';
  }
}

void write_benchmark_table(std::ostream& os, const BenchmarkSummary& s) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-12s %-15s %7s %10s %12s %9s %11s\n", "task", "mode", "success", "time_min",
                "human_min", "time_red%", "human_red%");
  os << buf;
  for (const auto& r : s.rows) {
    const bool base = r.mode == ProtocolMode::Noir1;
    std::snprintf(buf, sizeof buf, "%-12s %-15s %7.2f %10.2f %12.2f %9s %11s\n", r.task.c_str(),
                  std::string(to_string(r.mode)).c_str(), r.success_rate, r.mean_time_s / 60.0,
                  r.mean_human_time_s / 60.0, base ? "--" : pct(r.time_reduction_pct).c_str(),
                  base ? "--" : pct(r.reduction_pct).c_str());
    os << buf;
  }
}

}  // namespace noir
