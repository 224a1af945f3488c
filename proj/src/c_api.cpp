#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "dca/dca.h"
#include "dca/error.hpp"
#include "dca/harness.hpp"
#include "dca/phase2.hpp"
#include "dca/trace.hpp"
#include "json.hpp"

struct dca_graph {
  dca::ConstraintGraph graph;
};

struct dca_run {
  dca::ExperimentSummary summary;
};

namespace {

thread_local std::string last_error;

dca_status to_status(dca::Errc code) {
  switch (code) {
    case dca::Errc::invalid_argument: return DCA_ERR_INVALID_ARGUMENT;
    case dca::Errc::element_not_found: return DCA_ERR_ELEMENT_NOT_FOUND;
    case dca::Errc::invalid_rank: return DCA_ERR_INVALID_RANK;
    case dca::Errc::incompatible: return DCA_ERR_INCOMPATIBLE;
    case dca::Errc::invalid_constraint: return DCA_ERR_INVALID_CONSTRAINT;
    case dca::Errc::empty_batch: return DCA_ERR_EMPTY_BATCH;
    case dca::Errc::config: return DCA_ERR_CONFIG;
    case dca::Errc::replay_miss: return DCA_ERR_REPLAY_MISS;
    case dca::Errc::oracle_io: return DCA_ERR_ORACLE_IO;
    case dca::Errc::invalid_temperature: return DCA_ERR_INVALID_TEMPERATURE;
    case dca::Errc::out_of_range: return DCA_ERR_OUT_OF_RANGE;
    case dca::Errc::too_large: return DCA_ERR_TOO_LARGE;
    case dca::Errc::io: return DCA_ERR_IO;
  }
  return DCA_ERR_INTERNAL;
}

template <class F>
dca_status guarded(F &&body) {
  try {
    body();
    last_error.clear();
    return DCA_OK;
  } catch (const dca::Error &e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc &) {
    last_error = "out of memory";
    return DCA_ERR_INTERNAL;
  } catch (const std::exception &e) {
    last_error = e.what();
    return DCA_ERR_INTERNAL;
  }
}

void require(const void *p, const char *what) {
  if (!p) throw dca::Error(dca::Errc::invalid_argument, std::string(what) + " is NULL");
}

char *copy_string(const std::string &s) {
  char *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char *dca_version(void) { return "1.0.0"; }

const char *dca_status_name(dca_status status) {
  if (status == DCA_OK) return "ok";
  if (status == DCA_ERR_INTERNAL) return "internal";
  if (status >= DCA_ERR_INVALID_ARGUMENT && status <= DCA_ERR_IO) {
    return dca::errc_name(static_cast<dca::Errc>(status));
  }
  return "unknown";
}

const char *dca_last_error(void) { return last_error.c_str(); }

void dca_string_free(char *s) { std::free(s); }

dca_status dca_acceptance_probability(double f_current, double f_candidate, double temperature,
                                      double *out) {
  return guarded([&] {
    require(out, "out");
    *out = dca::acceptance_probability(f_current, f_candidate, temperature);
  });
}

dca_status dca_graph_create(dca_graph **out) {
  return guarded([&] {
    require(out, "out");
    *out = new dca_graph{};
  });
}

dca_status dca_graph_load_edge_list(const char *path, dca_graph **out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new dca_graph{dca::parse_edge_list(dca::read_file(path))};
  });
}

void dca_graph_destroy(dca_graph *graph) { delete graph; }

dca_status dca_graph_add(dca_graph *graph, int before, int after, dca_add_outcome *outcome) {
  return guarded([&] {
    require(graph, "graph");
    const auto result = graph->graph.try_add(dca::RankConstraint{before, after, {}});
    if (outcome) *outcome = static_cast<dca_add_outcome>(result);
  });
}

dca_status dca_graph_edge_count(const dca_graph *graph, size_t *out) {
  return guarded([&] {
    require(graph, "graph");
    require(out, "out");
    *out = graph->graph.edges().size();
  });
}

dca_status dca_graph_violations(const dca_graph *graph, const int *order, size_t n,
                                size_t *out) {
  return guarded([&] {
    require(graph, "graph");
    require(order, "order");
    require(out, "out");
    *out = graph->graph.violations(dca::Assignment(std::vector<int>(order, order + n)));
  });
}

dca_status dca_graph_write_dot(const dca_graph *graph, const char *path) {
  return guarded([&] {
    require(graph, "graph");
    require(path, "path");
    dca::export_dag(graph->graph, path);
  });
}

dca_status dca_graph_write_edge_list(const dca_graph *graph, const char *path) {
  return guarded([&] {
    require(graph, "graph");
    require(path, "path");
    dca::write_file(path, dca::to_edge_list(graph->graph));
  });
}

dca_status dca_run_experiment(const char *config_json, const char *base_dir,
                              const dca_run_options *options, dca_run **out) {
  return guarded([&] {
    require(config_json, "config_json");
    require(out, "out");
    *out = nullptr;
    auto cfg = dca::parse_run_config(config_json, base_dir ? base_dir : ".");
    dca::RunMode mode = dca::RunMode::both;
    if (options) {
      switch (options->mode) {
        case DCA_MODE_BOTH: mode = dca::RunMode::both; break;
        case DCA_MODE_PHASE1: mode = dca::RunMode::phase1_only; break;
        case DCA_MODE_PHASE2: mode = dca::RunMode::phase2_only; break;
        default: throw dca::Error(dca::Errc::invalid_argument, "unknown run mode");
      }
      if (options->has_seed) cfg.seed = options->seed;
      if (options->out_dir) cfg.out_dir = options->out_dir;
      if (options->start) cfg.start = dca::Assignment::parse(options->start);
      if (options->graph_path) cfg.graph = dca::parse_edge_list(dca::read_file(options->graph_path));
    }
    *out = new dca_run{dca::run_experiment(cfg, mode)};
  });
}

void dca_run_destroy(dca_run *run) { delete run; }

dca_status dca_run_best(const dca_run *run, int *buffer, size_t capacity, size_t *len,
                        double *mean, double *se) {
  return guarded([&] {
    require(run, "run");
    const auto order = run->summary.best.order();
    if (len) *len = order.size();
    if (buffer) {
      for (size_t i = 0; i < order.size() && i < capacity; ++i) buffer[i] = order[i];
    }
    if (mean) *mean = run->summary.best_estimate.mean;
    if (se) *se = run->summary.best_estimate.se;
  });
}

dca_status dca_run_summary_json(const dca_run *run, char **out) {
  return guarded([&] {
    require(run, "run");
    require(out, "out");
    *out = copy_string(dca::summary_to_json(run->summary));
  });
}

dca_status dca_run_graph(const dca_run *run, dca_graph **out) {
  return guarded([&] {
    require(run, "run");
    require(out, "out");
    *out = new dca_graph{run->summary.graph};
  });
}

dca_status dca_replay_verify(const char *fixture_dir, char **report_json, int *all_match) {
  return guarded([&] {
    require(fixture_dir, "fixture_dir");
    const auto report = dca::replay_verify(fixture_dir);
    if (report_json) *report_json = copy_string(report.to_json());
    if (all_match) *all_match = report.all_match() ? 1 : 0;
  });
}

dca_status dca_brute_force(const char *landscape_json, const dca_graph *graph,
                           char **result_json) {
  return guarded([&] {
    require(landscape_json, "landscape_json");
    require(result_json, "result_json");
    const auto landscape = dca::parse_landscape(landscape_json);
    const auto result = dca::brute_force_optimum(landscape, graph ? &graph->graph : nullptr);
    nlohmann::ordered_json j;
    j["best"] = std::vector<int>(result.best.order().begin(), result.best.order().end());
    j["mean"] = result.mean;
    j["enumerated"] = result.enumerated;
    *result_json = copy_string(j.dump());
  });
}

dca_status dca_export_dag_from_trace(const char *trace_path, const char *dot_path) {
  return guarded([&] {
    require(trace_path, "trace_path");
    require(dot_path, "dot_path");
    dca::export_dag(dca::graph_from_trace(dca::read_trace(trace_path)), dot_path);
  });
}

}  // extern "C"
