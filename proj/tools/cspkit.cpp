// cspkit command-line harness: instance generation, reductions, solvers,
// bound checkers, dictatorship tests, and seeded pipelines/sweeps. All I/O is
// JSON on files or stdin/stdout ("-").

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cspkit/approx.hpp"
#include "cspkit/csp.hpp"
#include "cspkit/dictatorship.hpp"
#include "cspkit/errors.hpp"
#include "cspkit/graph.hpp"
#include "cspkit/json_io.hpp"
#include "cspkit/oracles.hpp"
#include "cspkit/pipeline.hpp"
#include "cspkit/reductions.hpp"

namespace {

std::string slurp(const std::string& path) {
  if (path == "-") {
    std::ostringstream os;
    os << std::cin.rdbuf();
    return os.str();
  }
  std::ifstream in(path);
  if (!in) throw cspkit::ValidationError("cannot open input file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void emit(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw cspkit::ValidationError("cannot open output file: " + path);
  out << text << '\n';
}

cspkit::CspInstance load_instance(const std::string& path) {
  return cspkit::parse_instance(slurp(path));
}

cspkit::SimpleGraph load_graph(const std::string& path) {
  return cspkit::parse_graph(slurp(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cspkit: bounded-degree Max 2-CSP and claw-free MIS toolkit"};
  app.require_subcommand(1);

  std::string in_path = "-", out_path = "-", report_path = "-";

  // gen
  auto* gen = app.add_subcommand("gen", "generate a planted biregular instance");
  int g_nA = 2, g_nB = 2, g_d1 = 1, g_d2 = 1, g_Rl = 2, g_Rr = 2;
  double g_noise = 0.0;
  std::uint64_t g_seed = 0;
  std::string g_planted_out;
  gen->add_option("--nA", g_nA)->required();
  gen->add_option("--nB", g_nB)->required();
  gen->add_option("--d1", g_d1)->required();
  gen->add_option("--d2", g_d2)->required();
  gen->add_option("--R-left", g_Rl)->required();
  gen->add_option("--R-right", g_Rr)->required();
  gen->add_option("--noise", g_noise);
  gen->add_option("--seed", g_seed);
  gen->add_option("--out", out_path);
  gen->add_option("--planted-out", g_planted_out,
                  "write the planted assignment as a JSON array");

  // reduce-copy
  auto* rcopy = app.add_subcommand("reduce-copy", "copy expansion of a biregular instance");
  int c1 = 1, c2 = 1;
  rcopy->add_option("--in", in_path);
  rcopy->add_option("--c1", c1)->required();
  rcopy->add_option("--c2", c2)->required();
  rcopy->add_option("--out", out_path);

  // reduce-double
  auto* rdouble = app.add_subcommand("reduce-double", "bipartite doubling");
  rdouble->add_option("--in", in_path);
  rdouble->add_option("--out", out_path);

  // reduce-subsample
  auto* rsub = app.add_subcommand("reduce-subsample",
                                  "subsampling degree reduction");
  int s_dA = 1, s_dB = 1, s_C = 1;
  double s_delta = 0.1, s_nu = 0.9, s_t = 1.0;
  std::uint64_t s_seed = 0;
  std::optional<double> s_lambda, s_p;
  double s_lambda_raw = -1.0, s_p_raw = -1.0;
  rsub->add_option("--in", in_path);
  rsub->add_option("--dA", s_dA)->required();
  rsub->add_option("--dB", s_dB)->required();
  rsub->add_option("--delta", s_delta);
  rsub->add_option("--nu", s_nu);
  rsub->add_option("--t", s_t);
  rsub->add_option("--C", s_C)->required();
  rsub->add_option("--seed", s_seed);
  rsub->add_option("--override-lambda", s_lambda_raw);
  rsub->add_option("--override-p", s_p_raw);
  rsub->add_option("--out", out_path);
  rsub->add_option("--report-out", report_path);

  // reduce-fglss
  auto* rfglss = app.add_subcommand("reduce-fglss", "FGLSS conflict graph of an instance");
  rfglss->add_option("--in", in_path);
  rfglss->add_option("--out", out_path);

  // reduce-label-extended
  auto* rlab = app.add_subcommand("reduce-label-extended",
                                  "label-extended graph (Appendix D)");
  int lab_d = 1;
  rlab->add_option("--in", in_path);
  rlab->add_option("--d", lab_d)->required();
  rlab->add_option("--out", out_path);

  // approx
  auto* apx = app.add_subcommand("approx",
                                 "(d+1)/2-approximation (Appendix B)");
  int apx_d = 1;
  apx->add_option("--in", in_path);
  apx->add_option("--d", apx_d)->required();
  apx->add_option("--out", out_path);

  // solve-exact
  auto* sex = app.add_subcommand("solve-exact", "brute-force oracles");
  std::string sex_what = "val";
  int sex_cap = cspkit::kDefaultExactCap;
  sex->add_option("--in", in_path);
  sex->add_option("--what", sex_what)
      ->check(CLI::IsMember({"val", "cval", "indep"}));
  sex->add_option("--cap", sex_cap);
  sex->add_option("--out", out_path);

  // check-claw
  auto* claw = app.add_subcommand("check-claw", "induced k-claw search");
  int claw_k = 3;
  claw->add_option("--in", in_path);
  claw->add_option("--k", claw_k)->required();
  claw->add_option("--out", out_path);

  // bounds
  auto* bnd = app.add_subcommand("bounds", "concentration bound evaluators");
  std::string bnd_op = "chernoff";
  double b_mu = 0.1, b_theta = 0.0;
  long long b_m = 1, b_tau = 1, b_trials = 100000;
  std::uint64_t b_seed = 0;
  bnd->add_option("--op", bnd_op)
      ->check(CLI::IsMember({"chernoff", "tail", "clip-bound", "clip-exact",
                             "clip-mc", "mc-tail"}));
  bnd->add_option("--mu", b_mu)->required();
  bnd->add_option("--m", b_m)->required();
  bnd->add_option("--theta", b_theta);
  bnd->add_option("--tau", b_tau);
  bnd->add_option("--trials", b_trials);
  bnd->add_option("--seed", b_seed);
  bnd->add_option("--out", out_path);

  // dict-test
  auto* dt = app.add_subcommand("dict-test", "dictatorship test on a long-code table");
  int dt_R = 6, dt_t = 3, dt_L = 1;
  std::uint64_t dt_seed = 0;
  std::string dt_fn = "dictator:0", dt_mode = "exact";
  long long dt_trials = 100000;
  double dt_c = cspkit::kDefaultAcceptConstant;
  dt->add_option("--R", dt_R)->required();
  dt->add_option("--t", dt_t)->required();
  dt->add_option("--L", dt_L);
  dt->add_option("--seed", dt_seed);
  dt->add_option("--function", dt_fn,
                 "dictator:i | constant:c | random");
  dt->add_option("--mode", dt_mode)->check(CLI::IsMember({"exact", "mc"}));
  dt->add_option("--trials", dt_trials);
  dt->add_option("--c-accept", dt_c);
  dt->add_option("--out", out_path);

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "run a named end-to-end pipeline");
  std::string pipe_cfg = "-";
  pipe->add_option("--config", pipe_cfg);
  pipe->add_option("--out", out_path);

  // sweep
  auto* swp = app.add_subcommand("sweep", "pipeline sweep over cells x seeds");
  std::string swp_cfg = "-", swp_csv;
  swp->add_option("--config", swp_cfg);
  swp->add_option("--rows-csv", swp_csv, "also write rows as CSV");
  swp->add_option("--out", out_path);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      auto planted = cspkit::gen_planted(g_nA, g_nB, g_d1, g_d2, g_Rl, g_Rr,
                                         g_noise, g_seed);
      emit(out_path, cspkit::serialize_instance(planted.inst));
      if (!g_planted_out.empty())
        emit(g_planted_out, nlohmann::json(planted.planted).dump());
    } else if (*rcopy) {
      emit(out_path,
           cspkit::serialize_instance(cspkit::copy_expand(load_instance(in_path),
                                                          c1, c2)));
    } else if (*rdouble) {
      emit(out_path, cspkit::serialize_instance(
                         cspkit::bipartite_double(load_instance(in_path))));
    } else if (*rsub) {
      if (s_lambda_raw >= 0.0) s_lambda = s_lambda_raw;
      if (s_p_raw >= 0.0) s_p = s_p_raw;
      auto inst = load_instance(in_path);
      if (!inst.bipartition)
        throw cspkit::ParameterError("reduce-subsample: input must be bipartite");
      auto sp = cspkit::subsample_params(
          s_delta, s_nu, s_t, s_C, s_dA, s_dB,
          static_cast<long long>(inst.bipartition->left.size()), s_lambda, s_p);
      auto [reduced, rep] = cspkit::subsample_reduce(inst, s_dA, s_dB, sp, s_seed);
      emit(out_path, cspkit::serialize_instance(reduced));
      nlohmann::json jr;
      jr["params"] = cspkit::detail::params_to_json(sp);
      jr["report"] = cspkit::detail::report_to_json(rep);
      jr["input_hash"] = cspkit::instance_hash(inst);
      jr["output_hash"] = cspkit::instance_hash(reduced);
      emit(report_path, jr.dump());
    } else if (*rfglss) {
      auto fg = cspkit::fglss(load_instance(in_path));
      nlohmann::json j = cspkit::graph_to_json(fg.graph);
      j["vertex_map"] = nlohmann::json::array();
      for (const auto& v : fg.vertices)
        j["vertex_map"].push_back({v.edge_id, v.label_u, v.label_v});
      emit(out_path, j.dump());
    } else if (*rlab) {
      auto le = cspkit::label_extended(load_instance(in_path), lab_d);
      nlohmann::json j = cspkit::graph_to_json(le.graph);
      j["vertex_map"] = nlohmann::json::array();
      for (const auto& [v, s] : le.vertices) j["vertex_map"].push_back({v, s});
      emit(out_path, j.dump());
    } else if (*apx) {
      auto inst = load_instance(in_path);
      auto res = cspkit::approx_solve(inst, apx_d);
      nlohmann::json j;
      j["assignment"] = res.assignment;
      j["value"] = res.value;
      j["satisfied"] = res.satisfied;
      j["weighted_dp"] = res.weighted_dp;
      j["certificate"] = nlohmann::json::array();
      for (const auto& part : res.certificate.parts)
        j["certificate"].push_back(
            {{"weight", part.weight}, {"forest", part.edge_ids}});
      j["marginals"] = nlohmann::json::object();
      for (const auto& [id, m] : res.certificate.marginals)
        j["marginals"][std::to_string(id)] = m;
      j["exact_marginals"] = res.certificate.exact_marginals;
      emit(out_path, j.dump());
    } else if (*sex) {
      nlohmann::json j;
      if (sex_what == "val") {
        auto r = cspkit::brute_val(load_instance(in_path));
        j = {{"value", r.value}, {"satisfied", r.satisfied},
             {"witness", r.witness}};
      } else if (sex_what == "cval") {
        auto r = cspkit::brute_cval(load_instance(in_path));
        j = {{"size", r.size}, {"witness", r.witness}};
      } else {
        auto r = cspkit::indep_exact(load_graph(in_path), sex_cap);
        j = {{"size", r.size}, {"witness", r.witness}};
      }
      emit(out_path, j.dump());
    } else if (*claw) {
      auto w = cspkit::find_claw(load_graph(in_path), claw_k);
      nlohmann::json j;
      j["claw_free"] = !w.has_value();
      if (w) j["witness"] = {{"center", w->center}, {"leaves", w->leaves}};
      emit(out_path, j.dump());
    } else if (*bnd) {
      nlohmann::json j;
      j["op"] = bnd_op;
      if (bnd_op == "chernoff")
        j["value"] = cspkit::chernoff_bound(b_mu, b_m, b_theta);
      else if (bnd_op == "tail")
        j["value"] = cspkit::binom_tail(b_mu, b_m, b_theta);
      else if (bnd_op == "clip-bound")
        j["value"] = cspkit::clip_excess(b_mu, b_m, b_tau);
      else if (bnd_op == "clip-exact")
        j["value"] =
            cspkit::clip_excess(b_mu, b_m, b_tau, cspkit::ClipMode::Exact);
      else if (bnd_op == "clip-mc")
        j["value"] = cspkit::clip_excess(b_mu, b_m, b_tau,
                                         cspkit::ClipMode::MonteCarlo,
                                         b_trials, b_seed);
      else
        j["value"] = cspkit::monte_carlo_tail(b_mu, b_m, b_theta, b_trials,
                                              b_seed);
      emit(out_path, j.dump());
    } else if (*dt) {
      auto gadget = cspkit::build_gadget(dt_R, dt_t, dt_seed, dt_c);
      cspkit::TestFunction f;
      if (dt_fn.rfind("dictator:", 0) == 0)
        f = cspkit::TestFunction::dictator(dt_R, dt_L,
                                           std::stoi(dt_fn.substr(9)));
      else if (dt_fn.rfind("constant:", 0) == 0)
        f = cspkit::TestFunction::constant(dt_R, dt_L,
                                           std::stoi(dt_fn.substr(9)));
      else if (dt_fn == "random") {
        cspkit::Rng rng(dt_seed + 1);
        f = cspkit::TestFunction::random(dt_R, dt_L, rng);
      } else {
        throw cspkit::ParameterError("unknown --function spec: " + dt_fn);
      }
      const auto mode = dt_mode == "exact" ? cspkit::AcceptMode::Exact
                                           : cspkit::AcceptMode::MonteCarlo;
      nlohmann::json j;
      j["R"] = dt_R;
      j["t"] = dt_t;
      j["L"] = dt_L;
      j["rho"] = gadget.rho;
      j["num_pairs"] = gadget.pairs.size();
      j["balanced"] = f.is_balanced();
      j["accept_prob"] =
          cspkit::test_accept_prob(gadget, f, mode, dt_trials, dt_seed);
      j["gadget"] = cspkit::graph_to_json(gadget.H);
      emit(out_path, j.dump());
    } else if (*pipe) {
      auto cfg = cspkit::config_from_json(nlohmann::json::parse(slurp(pipe_cfg)));
      emit(out_path, cspkit::run_pipeline(cfg).dump());
    } else if (*swp) {
      auto summary =
          cspkit::experiment_sweep(nlohmann::json::parse(slurp(swp_cfg)));
      nlohmann::json j;
      j["cells"] = summary.cells;
      j["rows"] = summary.rows;
      emit(out_path, j.dump());
      if (!swp_csv.empty()) emit(swp_csv, cspkit::sweep_rows_csv(summary.rows));
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
