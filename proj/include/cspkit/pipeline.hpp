#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cspkit/csp.hpp"
#include "cspkit/errors.hpp"
#include "cspkit/graph.hpp"
#include "cspkit/json_io.hpp"
#include "cspkit/oracles.hpp"
#include "cspkit/reductions.hpp"

namespace cspkit {

// Lifts an assignment of a biregular instance to its copy expansion (every
// copy of a vertex inherits the original label). Mirrors the vertex indexing
// of copy_expand.
inline Assignment copy_expand_assignment(const CspInstance& inst, int c1,
                                         int c2, const Assignment& psi) {
  auto dd = detail::biregular_degrees(inst);
  if (!dd)
    throw ParameterError("copy_expand_assignment: input must be biregular");
  const auto [d1, d2] = *dd;
  const auto& A = inst.bipartition->left;
  const auto& B = inst.bipartition->right;
  Assignment out;
  out.reserve(A.size() * d1 * c1 + B.size() * d2 * c2);
  for (std::size_t i = 0; i < A.size() * static_cast<std::size_t>(d1 * c1); ++i)
    out.push_back(psi[A[i / static_cast<std::size_t>(d1 * c1)]]);
  for (std::size_t i = 0; i < B.size() * static_cast<std::size_t>(d2 * c2); ++i)
    out.push_back(psi[B[i / static_cast<std::size_t>(d2 * c2)]]);
  return out;
}

struct GeneratorSpec {
  int nA = 0, nB = 0, d1 = 0, d2 = 0;
  int R_left = 0, R_right = 0;
  double noise = 0.0;
};

struct PipelineConfig {
  std::string pipeline;  // "ug-2csp" or "np-clawfree"
  std::optional<GeneratorSpec> generator;
  std::optional<CspInstance> instance;
  int d = 0;  // ug-2csp
  int k = 0;  // np-clawfree
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> override_lambda;
  std::optional<double> override_p;
  bool exact_checks = true;  // run indep/claw verification when feasible
};

inline PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  try {
    c.pipeline = j.at("pipeline").get<std::string>();
    if (j.contains("generator")) {
      const auto& g = j.at("generator");
      GeneratorSpec gs;
      gs.nA = g.at("nA").get<int>();
      gs.nB = g.at("nB").get<int>();
      gs.d1 = g.at("d1").get<int>();
      gs.d2 = g.at("d2").get<int>();
      gs.R_left = g.at("R_left").get<int>();
      gs.R_right = g.at("R_right").get<int>();
      gs.noise = g.value("noise", 0.0);
      c.generator = gs;
    }
    if (j.contains("instance")) c.instance = instance_from_json(j.at("instance"));
    c.d = j.value("d", 0);
    c.k = j.value("k", 0);
    c.epsilon = j.at("epsilon").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("override_lambda"))
      c.override_lambda = j.at("override_lambda").get<double>();
    if (j.contains("override_p")) c.override_p = j.at("override_p").get<double>();
    c.exact_checks = j.value("exact_checks", true);
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("pipeline config schema violation: ") +
                          ex.what());
  }
  return c;
}

namespace detail {

inline nlohmann::json params_to_json(const SubsampleParams& sp) {
  nlohmann::json j;
  j["lambda"] = sp.lambda;
  j["p"] = sp.p;
  j["d0"] = sp.d0;
  j["chi"] = sp.chi;
  j["R0"] = sp.r0;
  j["n_E"] = sp.n_e;
  j["lambda_overridden"] = sp.lambda_overridden;
  j["p_overridden"] = sp.p_overridden;
  j["mode"] = sp.paper_faithful ? "paper-faithful" : "desk-scale";
  return j;
}

inline nlohmann::json report_to_json(const ReductionReport& rep) {
  nlohmann::json j;
  j["kept_edges"] = rep.kept_edges;
  j["removed_for_degree"] = rep.removed_for_degree;
  j["event_E1"] = rep.event_e1;
  j["event_E2"] = rep.event_e2;
  if (rep.event_e3)
    j["event_E3"] = *rep.event_e3;
  else
    j["event_E3"] = nullptr;
  j["seed"] = rep.seed;
  return j;
}

inline std::pair<CspInstance, std::optional<Assignment>> resolve_input(
    const PipelineConfig& c) {
  if (c.instance) return {*c.instance, std::nullopt};
  if (!c.generator)
    throw ParameterError("pipeline config needs an instance or a generator");
  const auto& g = *c.generator;
  auto planted = gen_planted(g.nA, g.nB, g.d1, g.d2, g.R_left, g.R_right,
                             g.noise, c.seed);
  return {std::move(planted.inst), std::move(planted.planted)};
}

}  // namespace detail

// Degree reduction pipeline at equal side degrees: copy expansion with
// c1 = c2 = d, then subsampling down to a d-bounded instance, with planted
// completeness tracked when the input carries a planted assignment.
inline nlohmann::json pipeline_ug_2csp(const PipelineConfig& c) {
  if (c.pipeline != "ug-2csp")
    throw ParameterError("pipeline_ug_2csp: config pipeline mismatch");
  if (c.d < 1) throw ParameterError("pipeline_ug_2csp: d must be >= 1");
  if (!(c.epsilon > 0.0 && c.epsilon < 0.5))
    throw ParameterError("pipeline_ug_2csp: epsilon outside (0, 1/2)");

  nlohmann::json rep;
  rep["pipeline"] = c.pipeline;
  rep["seed"] = c.seed;
  auto [input, planted] = detail::resolve_input(c);
  input.validate();
  rep["input_hash"] = instance_hash(input);

  auto dd = detail::biregular_degrees(input);
  if (!dd) throw ParameterError("pipeline_ug_2csp: input must be biregular");
  const auto [d1, d2] = *dd;
  CspInstance expanded = copy_expand(input, c.d, c.d);
  rep["expanded_hash"] = instance_hash(expanded);
  const int C = d1 * d2;

  const double delta = 0.01 * c.epsilon;
  const double nu = 1.0 - delta;
  auto sp = subsample_params(delta, nu, 1.0, C, c.d, c.d,
                             static_cast<long long>(
                                 expanded.bipartition->left.size()),
                             c.override_lambda, c.override_p);
  rep["params"] = detail::params_to_json(sp);

  auto [reduced, rrep] = subsample_reduce(expanded, c.d, c.d, sp, c.seed);
  rep["output_hash"] = instance_hash(reduced);
  rep["output_edges"] = reduced.edges.size();
  rep["degree_bound_ok"] =
      validate_degrees(reduced, DegreeSpec::bounded_bipartite(c.d, c.d)).ok;

  if (planted) {
    Assignment expanded_psi =
        copy_expand_assignment(input, c.d, c.d, *planted);
    const double val_in = eval_assignment(expanded, expanded_psi);
    rep["planted_val_expanded"] = val_in;
    if (reduced.edges.empty()) {
      rep["planted_val_output"] = nullptr;
      rrep.event_e3 = false;
    } else {
      const double val_out = eval_assignment(reduced, expanded_psi);
      rep["planted_val_output"] = val_out;
      rrep.event_e3 = val_out >= val_in - delta;
    }
  }
  rep["report"] = detail::report_to_json(rrep);
  return rep;
}

// Claw-free pipeline: balanced degree split, copy expansion to
// (dA*C, dB*C)-biregular, subsampling at t = 1/2, FGLSS, then claw-freeness
// and independence-number verification when the graph is small enough.
inline nlohmann::json pipeline_np_clawfree(const PipelineConfig& c) {
  if (c.pipeline != "np-clawfree")
    throw ParameterError("pipeline_np_clawfree: config pipeline mismatch");
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0 / (3.0 + 2.0 * std::sqrt(2.0))))
    throw ParameterError("pipeline_np_clawfree: epsilon out of range");

  nlohmann::json rep;
  rep["pipeline"] = c.pipeline;
  rep["seed"] = c.seed;
  auto bd = balance_degrees(c.k, c.epsilon);
  rep["q1"] = bd.q1;
  rep["q2"] = bd.q2;
  rep["dA"] = bd.d_left;
  rep["dB"] = bd.d_right;
  rep["dA_plus_dB_le_k"] = bd.d_left + bd.d_right <= c.k;

  auto [input, planted] = detail::resolve_input(c);
  input.validate();
  rep["input_hash"] = instance_hash(input);
  auto dd = detail::biregular_degrees(input);
  if (!dd) throw ParameterError("pipeline_np_clawfree: input must be biregular");
  const auto [d1, d2] = *dd;
  // copy counts chosen so the expansion is (dA*C, dB*C)-biregular, C = d1*d2
  CspInstance expanded = copy_expand(input, bd.d_right, bd.d_left);
  rep["expanded_hash"] = instance_hash(expanded);
  const int C = d1 * d2;

  const double delta = 0.01 * c.epsilon;
  const double nu = 0.5 - delta;
  auto sp = subsample_params(delta, nu, 0.5, C, bd.d_left, bd.d_right,
                             static_cast<long long>(
                                 expanded.bipartition->left.size()),
                             c.override_lambda, c.override_p);
  rep["params"] = detail::params_to_json(sp);

  auto [reduced, rrep] = subsample_reduce(expanded, bd.d_left, bd.d_right, sp,
                                          c.seed);
  rep["output_hash"] = instance_hash(reduced);
  rep["degree_bound_ok"] =
      validate_degrees(reduced,
                       DegreeSpec::bounded_bipartite(bd.d_left, bd.d_right))
          .ok;
  if (planted && !reduced.edges.empty()) {
    Assignment expanded_psi =
        copy_expand_assignment(input, bd.d_right, bd.d_left, *planted);
    const double val_in = eval_assignment(expanded, expanded_psi);
    const double val_out = eval_assignment(reduced, expanded_psi);
    rep["planted_val_expanded"] = val_in;
    rep["planted_val_output"] = val_out;
    rrep.event_e3 = val_out >= val_in - delta;
  }
  rep["report"] = detail::report_to_json(rrep);

  if (reduced.edges.empty()) {
    rep["fglss"] = nullptr;
    return rep;
  }
  auto fg = fglss(reduced);
  nlohmann::json jf;
  jf["vertices"] = fg.graph.num_vertices();
  jf["edges"] = fg.graph.num_edges();
  if (c.exact_checks && fg.graph.num_vertices() <= kDefaultExactCap) {
    jf["claw_free_at_k"] = !find_claw(fg.graph, c.k).has_value();
    long long space = 1;
    bool feasible = true;
    for (int v = 0; v < reduced.n; ++v) {
      space *= reduced.alphabet_sizes[v];
      if (space > kDefaultBruteCap) {
        feasible = false;
        break;
      }
    }
    if (feasible) {
      auto bv = brute_val(reduced);
      auto is = indep_exact(fg.graph);
      jf["indep"] = is.size;
      jf["val_times_edges"] = bv.satisfied;
      jf["indep_equals_val_times_edges"] =
          static_cast<long long>(is.size) == bv.satisfied;
    } else {
      jf["indep_equals_val_times_edges"] = nullptr;
    }
  } else {
    jf["claw_free_at_k"] = nullptr;
    jf["indep_equals_val_times_edges"] = nullptr;
  }
  rep["fglss"] = jf;
  return rep;
}

inline nlohmann::json run_pipeline(const PipelineConfig& c) {
  if (c.pipeline == "ug-2csp") return pipeline_ug_2csp(c);
  if (c.pipeline == "np-clawfree") return pipeline_np_clawfree(c);
  throw ParameterError("unknown pipeline: " + c.pipeline);
}

// Sweep: runs a pipeline over a grid of config cells and a seed list. Cell
// (ci) with base seed s runs at the derived seed split(s, ci); failures are
// recorded per row and never abort the sweep.
struct SweepSummary {
  nlohmann::json rows = nlohmann::json::array();
  nlohmann::json cells = nlohmann::json::array();  // per-cell aggregates
};

inline SweepSummary experiment_sweep(const nlohmann::json& sweep_config) {
  SweepSummary out;
  const auto& cells = sweep_config.at("cells");
  const auto seeds = sweep_config.at("seeds").get<std::vector<std::uint64_t>>();
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    long long ok_runs = 0, e1_hits = 0, e2_hits = 0, e3_hits = 0,
              e3_known = 0, complete_hits = 0;
    for (std::size_t si = 0; si < seeds.size(); ++si) {
      nlohmann::json cell_cfg = cells.at(ci);
      cell_cfg["seed"] = Rng(seeds[si]).split(ci).seed();
      nlohmann::json row;
      row["cell"] = ci;
      row["seed"] = cell_cfg["seed"];
      try {
        auto cfg = config_from_json(cell_cfg);
        auto r = run_pipeline(cfg);
        row["status"] = "ok";
        row["event_E1"] = r["report"]["event_E1"];
        row["event_E2"] = r["report"]["event_E2"];
        row["event_E3"] = r["report"]["event_E3"];
        row["degree_bound_ok"] = r["degree_bound_ok"];
        if (r.contains("planted_val_output") &&
            !r["planted_val_output"].is_null())
          row["planted_val_output"] = r["planted_val_output"];
        ++ok_runs;
        if (row["event_E1"].get<bool>()) ++e1_hits;
        if (row["event_E2"].get<bool>()) ++e2_hits;
        if (!row["event_E3"].is_null()) {
          ++e3_known;
          if (row["event_E3"].get<bool>()) {
            ++e3_hits;
            ++complete_hits;
          }
        }
      } catch (const std::exception& ex) {
        row["status"] = std::string("error: ") + ex.what();
      }
      out.rows.push_back(std::move(row));
    }
    nlohmann::json agg;
    agg["cell"] = ci;
    agg["runs"] = seeds.size();
    agg["ok_runs"] = ok_runs;
    agg["freq_E1"] = ok_runs ? static_cast<double>(e1_hits) / ok_runs : 0.0;
    agg["freq_E2"] = ok_runs ? static_cast<double>(e2_hits) / ok_runs : 0.0;
    agg["completeness_rate"] =
        e3_known ? static_cast<double>(complete_hits) / e3_known : 0.0;
    out.cells.push_back(std::move(agg));
  }
  return out;
}

// CSV projection of sweep rows, fixed column order.
inline std::string sweep_rows_csv(const nlohmann::json& rows) {
  std::ostringstream os;
  os << "cell,seed,status,event_E1,event_E2,event_E3,degree_bound_ok\n";
  auto flag = [](const nlohmann::json& row, const char* key) -> std::string {
    if (!row.contains(key) || row[key].is_null()) return "";
    return row[key].get<bool>() ? "1" : "0";
  };
  for (const auto& row : rows) {
    std::string status = row["status"].get<std::string>();
    for (char& ch : status)
      if (ch == ',' || ch == '\n') ch = ';';
    os << row["cell"].get<std::size_t>() << ','
       << row["seed"].get<std::uint64_t>() << ','
       << status << ',' << flag(row, "event_E1")
       << ',' << flag(row, "event_E2") << ',' << flag(row, "event_E3") << ','
       << flag(row, "degree_bound_ok") << '\n';
  }
  return os.str();
}

}  // namespace cspkit
