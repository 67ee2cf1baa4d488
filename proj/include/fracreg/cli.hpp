#pragma once

// Batch commands behind the fracreg executable.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "fracreg/acceptance.hpp"
#include "fracreg/config.hpp"
#include "fracreg/fracreg.hpp"
#include "fracreg/report.hpp"

namespace fracreg::cli {

enum ExitCode { kOk = 0, kVerifyFail = 1, kNonconvergence = 2, kConfigError = 3 };

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"solve", "torsion", "obstacle", "barrier", "diagnose", "verify"};
  return c;
}

struct Context {
  RunConfig cfg;
  Provenance prov;
  std::filesystem::path out;
  std::ostream* log = &std::cout;

  std::string path(const std::string& name) const { return (out / name).string(); }
};

template <int N>
Domain<N> make_domain(const DomainConfig& d) {
  Vec<N> c{};
  for (int k = 0; k < N && k < static_cast<int>(d.center.size()); ++k) c[k] = d.center[k];
  const auto& q = d.params;
  if constexpr (N == 1) {
    return Domain<1>::interval(c[0], q[0]);
  } else {
    if (d.kind == "ball") return Domain<2>::ball(c, q[0]);
    if (d.kind == "stadium") return Domain<2>::stadium(c, q[0], q[1]);
    return Domain<2>::ellipse(c, q[0], q[1]);
  }
}

template <int N>
std::vector<std::vector<double>> field_rows(const Field<N>& u, std::initializer_list<const Field<N>*> extra = {}) {
  std::vector<std::vector<double>> rows;
  const Grid<N>& g = u.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec<N> x = g.coord(i);
    std::vector<double> row(x.begin(), x.end());
    for (const auto* f : extra) row.push_back((*f)[i]);
    row.push_back(u[i]);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<std::string> coord_header(int N) {
  return N == 1 ? std::vector<std::string>{"x"} : std::vector<std::string>{"x", "y"};
}

inline Json summary_head(const Context& ctx, const std::string& command) {
  Json j = to_json(ctx.prov);
  j["command"] = command;
  j["p"] = num(ctx.cfg.p);
  j["s"] = num(ctx.cfg.s);
  return j;
}

template <int N>
void write_history(const Context& ctx, const SolveStats& st) {
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < st.residual_history.size(); ++k)
    rows.push_back({double(k), st.residual_history[k],
                    k < st.energy_history.size() ? st.energy_history[k] : std::numeric_limits<double>::quiet_NaN()});
  write_csv(ctx.path("residuals.csv"), {"iteration", "residual", "energy"}, rows, ctx.prov);
}

template <int N>
int cmd_solve(const Context& ctx, bool torsion) {
  const auto D = make_domain<N>(ctx.cfg.domain);
  const auto g = std::make_shared<const Grid<N>>(Grid<N>::around(D, ctx.cfg.spacing(), ctx.cfg.grid.margin));
  const double f = torsion ? 1.0 : ctx.cfg.load;
  const auto sol = solve_dirichlet(Field<N>::sample(g, [f](const Vec<N>&) { return f; }), ctx.cfg.solver);
  auto hdr = coord_header(N);
  hdr.push_back("u");
  write_csv(ctx.path("solution.csv"), hdr, field_rows(sol.u), ctx.prov);
  write_history<N>(ctx, sol.stats);
  Json j = summary_head(ctx, torsion ? "torsion" : "solve");
  j["domain"] = D.describe();
  j["grid"] = {{"h", num(g->h())}, {"n", std::vector<int>(g->shape().begin(), g->shape().end())}};
  j["load"] = num(f);
  j["unknowns"] = g->interior_count();
  j["sup_u"] = num(sol.u.sup_abs());
  j["solver"] = to_json(sol.stats);
  if (torsion) j["hopf"] = to_json(check_hopf(sol.u, D, ctx.cfg.s));
  write_json(ctx.path("summary.json"), j);
  *ctx.log << "sup|u| = " << g17(sol.u.sup_abs()) << ", " << sol.stats.iterations << " iterations\n";
  return kOk;
}

template <int N>
int cmd_obstacle(const Context& ctx) {
  const auto D = make_domain<N>(ctx.cfg.domain);
  const auto g = std::make_shared<const Grid<N>>(Grid<N>::around(D, ctx.cfg.spacing(), ctx.cfg.grid.margin));
  const auto& oc = ctx.cfg.obstacle;
  Vec<N> c{};
  for (int k = 0; k < N && k < static_cast<int>(oc.center.size()); ++k) c[k] = oc.center[k];
  const auto lower = Field<N>::sample(g, [&](const Vec<N>& x) {
    return oc.lower_height * bump_profile(dist<N>(x, c) / oc.lower_radius) - oc.lower_offset;
  });
  const auto upper = Field<N>::sample(g, [&](const Vec<N>&) { return oc.upper_level; });
  Solution<N> sol{Field<N>(g), {}};
  try {
    sol = solve_double_obstacle(lower, upper, ctx.cfg.solver);
  } catch (const ContractError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  auto hdr = coord_header(N);
  hdr.insert(hdr.end(), {"lower", "upper", "u"});
  write_csv(ctx.path("solution.csv"), hdr, field_rows(sol.u, {&lower, &upper}), ctx.prov);
  write_history<N>(ctx, sol.stats);
  std::size_t at_lower = 0, at_upper = 0;
  for (std::size_t i = 0; i < g->size(); ++i) {
    if (!g->is_interior(i)) continue;
    at_lower += sol.u[i] == lower[i];
    at_upper += sol.u[i] == upper[i];
  }
  Json j = summary_head(ctx, "obstacle");
  j["domain"] = D.describe();
  j["grid"] = {{"h", num(g->h())}, {"n", std::vector<int>(g->shape().begin(), g->shape().end())}};
  j["contact_lower"] = at_lower;
  j["contact_upper"] = at_upper;
  j["sup_u"] = num(sol.u.sup_abs());
  j["solver"] = to_json(sol.stats);
  write_json(ctx.path("summary.json"), j);
  *ctx.log << "contact nodes: " << at_lower << " lower, " << at_upper << " upper\n";
  return kOk;
}

template <int N>
int cmd_barrier(const Context& ctx) {
  const auto D = make_domain<N>(ctx.cfg.domain);
  const auto& bc = ctx.cfg.barrier;
  BarrierSpec<N> sp;
  sp.kind = bc.kind == "bump_upper" ? BarrierKind::bump_upper : BarrierKind::bump_lower;
  sp.R = bc.R;
  sp.anchor = D.boundary_point(bc.anchor_t);
  sp.multiplier = bc.multiplier;
  const auto lambdas = symmetric_sweep(bc.lambda_max, bc.lambda_count);
  const auto rep = barrier_bound_report<N>(sp, D, ctx.cfg.p, ctx.cfg.s, ctx.cfg.spacing(), lambdas);
  std::vector<std::vector<double>> rows;
  for (const auto* sw : {&rep.coarse, &rep.fine})
    for (const auto& r : sw->rows) rows.push_back({sw->h, r.lambda, r.K, r.ratio, double(r.points)});
  write_csv(ctx.path("barrier_sweep.csv"), {"h", "lambda", "K", "ratio", "points"}, rows, ctx.prov);
  Json j = summary_head(ctx, "barrier");
  j["domain"] = D.describe();
  j["kind"] = to_string(sp.kind);
  j["bump_profile"] = "exponential smooth step";
  j["R"] = num(sp.R);
  j["anchor"] = num_array(to_vector<N>(sp.anchor));
  j["C6"] = {{"h", num(rep.coarse.C6)}, {"h_half", num(rep.fine.C6)}};
  j["lambda1"] = num(rep.lambda1);
  Json checks = Json::array();
  checks.push_back(to_json(rep.bounded));
  checks.push_back(to_json(rep.stable));
  bool pass = rep.bounded.pass && rep.stable.pass;
  if (bc.upper) {
    const auto g = std::make_shared<const Grid<N>>(Grid<N>::around(D, ctx.cfg.spacing(), ctx.cfg.grid.margin));
    const Vec<N> target = sp.anchor + (bc.xbar_depth * sp.R) * D.inner_normal(sp.anchor);
    const Vec<N> xbar = g->coord(g->index(g->nearest(target)));
    const auto ub = build_upper_barrier<N>(D, sp.anchor, sp.R, xbar, ctx.cfg.solver, g);
    auto hdr = coord_header(N);
    hdr.insert(hdr.end(), {"lower", "upper", "v"});
    write_csv(ctx.path("upper_barrier.csv"), hdr, field_rows(ub.v, {&ub.lower, &ub.upper}), ctx.prov);
    j["upper_barrier"] = {{"xbar", num_array(to_vector<N>(xbar))}, {"lambda", num(ub.lambda)},
                          {"C_tilde", num(ub.C_tilde)},          {"C_flap", num(ub.C_flap)},
                          {"C_size", num(ub.C_size)},            {"c_ring", num(ub.c_ring)},
                          {"c_lower", num(ub.c_lower)},          {"solver", to_json(ub.stats)}};
    for (const auto& c : ub.checks) {
      checks.push_back(to_json(c));
      pass = pass && c.pass;
    }
  }
  j["checks"] = std::move(checks);
  write_json(ctx.path("barrier.json"), j);
  *ctx.log << "C6 = " << g17(rep.coarse.C6) << " (h), " << g17(rep.fine.C6) << " (h/2); checks "
           << (pass ? "pass" : "fail") << "\n";
  return kOk;
}

template <int N>
int cmd_diagnose(const Context& ctx) {
  const auto D = make_domain<N>(ctx.cfg.domain);
  const auto g = std::make_shared<const Grid<N>>(Grid<N>::around(D, ctx.cfg.spacing(), ctx.cfg.grid.margin));
  ReportOptions ro;
  ro.t = ctx.cfg.diagnostics.t;
  ro.anchors = ctx.cfg.diagnostics.anchors;
  ro.max_levels = ctx.cfg.diagnostics.max_levels;
  ro.excess_scale = ctx.cfg.diagnostics.excess_scale;
  const double f = ctx.cfg.load;
  auto rep = theorem_main_report<N>(D, [f](const Vec<N>&) { return f; }, ctx.cfg.solver, g, ro);
  rep.config_hash = ctx.prov.config_hash;
  write_json(ctx.path("diagnostics.json"), to_json(rep, ctx.prov));
  write_text(ctx.path("oscillation.svg"), oscillation_svg(rep, ctx.prov));
  std::vector<std::vector<double>> rows;
  for (std::size_t a = 0; a < rep.anchors.size(); ++a)
    for (std::size_t k = 0; k < rep.anchors[a].trace.radii.size(); ++k)
      rows.push_back({double(a), rep.anchors[a].trace.radii[k], rep.anchors[a].trace.osc[k]});
  write_csv(ctx.path("oscillation.csv"), {"anchor", "radius", "osc"}, rows, ctx.prov);
  *ctx.log << "sup|u/d^s| = " << g17(rep.sup_quotient) << "; checks " << (rep.passed() ? "pass" : "fail") << "\n";
  return kOk;
}

inline int cmd_verify(const Context& ctx) {
  acceptance::Options o;
  o.seed = ctx.cfg.seed;
  o.tolerance_scale = ctx.cfg.verify.tolerance_scale;
  o.only = ctx.cfg.verify.criteria;
  const auto results = acceptance::run_all(o, [&](const acceptance::CriterionResult& r) {
    *ctx.log << acceptance::format_line(r) << "\n" << std::flush;
  });
  Json j = summary_head(ctx, "verify");
  j["tolerance_scale"] = num(o.tolerance_scale);
  Json arr = Json::array();
  bool all = !results.empty();
  for (const auto& r : results) {
    Json checks = Json::array();
    for (const auto& c : r.checks) checks.push_back(to_json(c));
    arr.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"checks", std::move(checks)}});
    all = all && r.pass;
  }
  j["criteria"] = std::move(arr);
  j["pass"] = all;
  write_json(ctx.path("verify.json"), j);
  *ctx.log << (all ? "all criteria pass" : "some criteria FAIL") << "\n";
  return all ? kOk : kVerifyFail;
}

struct Arguments {
  std::string command;
  std::string config;
  std::string out;  // empty: [run] out from the config
  std::optional<std::uint64_t> seed;
  int refine = 0;
};

template <int N>
int dispatch(const std::string& cmd, const Context& ctx) {
  if (cmd == "solve") return cmd_solve<N>(ctx, false);
  if (cmd == "torsion") return cmd_solve<N>(ctx, true);
  if (cmd == "obstacle") return cmd_obstacle<N>(ctx);
  if (cmd == "barrier") return cmd_barrier<N>(ctx);
  if (cmd == "diagnose") return cmd_diagnose<N>(ctx);
  throw ConfigError("unknown command " + cmd);
}

/// Runs one command and maps failures to exit codes.
inline int run(const Arguments& args, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  try {
    Context ctx;
    ctx.log = &log;
    ctx.cfg = load_config(args.config);
    if (args.seed) ctx.cfg.seed = *args.seed;
    ctx.cfg.refine = args.refine;
    validate(ctx.cfg);
    ctx.prov.config_hash = config_hash(ctx.cfg);
    ctx.prov.seed = ctx.cfg.seed;
    ctx.out = args.out.empty() ? std::filesystem::path(ctx.cfg.out_dir) : std::filesystem::path(args.out);
    std::filesystem::create_directories(ctx.out);
    if (args.command == "verify") return cmd_verify(ctx);
    if (ctx.cfg.domain.dimension() == 1) return dispatch<1>(args.command, ctx);
    return dispatch<2>(args.command, ctx);
  } catch (const NonconvergenceError& e) {
    err << "nonconvergence: " << e.what() << "\n";
    return kNonconvergence;
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    err << "invalid setup: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace fracreg::cli
