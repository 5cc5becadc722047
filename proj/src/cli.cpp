#include "fillab/cli.hpp"

#include "fillab/boost_converter.hpp"
#include "fillab/core.hpp"
#include "fillab/integrator.hpp"
#include "fillab/io.hpp"
#include "fillab/jets.hpp"
#include "fillab/normal_form.hpp"
#include "fillab/toy_model.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

namespace fillab::cli {

namespace {

struct GlobalOpts {
  std::string out_dir = ".";
  std::vector<std::string> formats = {"csv", "svg"};
  std::uint64_t seed = 0;
  int jobs = 1;

  bool wants(const std::string& f) const {
    return std::find(formats.begin(), formats.end(), f) != formats.end();
  }
  std::string path(const std::string& name) const {
    return (std::filesystem::path(out_dir) / name).string();
  }
};

Vec3 parse_point(const std::string& s) {
  Vec3 p;
  std::stringstream ss(s);
  char comma;
  if (!(ss >> p.x() >> comma >> p.y() >> comma >> p.z()))
    throw ParseError("expected point as x,y,z");
  return p;
}

FilippovSystem resolve_system(const std::string& system_path, bool use_toy,
                              const toy::ToyParams& tp) {
  if (!system_path.empty()) return io::load_system_json(system_path);
  if (use_toy) return toy::make_system(tp);
  throw ParseError("pass --system FILE or --toy");
}

// Sharded deterministic map: results land by index regardless of the
// completion order.
template <typename F>
std::vector<std::vector<std::string>> grid_rows(int n, int jobs, F&& fn) {
  std::vector<std::vector<std::string>> rows(n);
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) rows[i] = fn(i);
    return rows;
  }
  std::vector<std::future<void>> futs;
  for (int j = 0; j < jobs; ++j)
    futs.push_back(std::async(std::launch::async, [&rows, &fn, j, jobs, n] {
      for (int i = j; i < n; i += jobs) rows[i] = fn(i);
    }));
  for (auto& f : futs) f.get();
  return rows;
}

void emit_trajectory(const GlobalOpts& g, const HybridTrajectory& traj,
                     const std::string& stem, std::ostream& out) {
  if (g.wants("csv")) {
    std::vector<std::vector<std::string>> rows;
    int idx = 0;
    for (const auto& arc : traj.arcs) {
      for (std::size_t i = 0; i < arc.times.size(); ++i)
        rows.push_back({std::to_string(idx), to_string(arc.kind),
                        io::fmt17(arc.times[i]), io::fmt17(arc.points[i].x()),
                        io::fmt17(arc.points[i].y()),
                        io::fmt17(arc.points[i].z())});
      ++idx;
    }
    io::write_csv(g.path(stem + ".csv"),
                  {"arc_index", "kind", "t", "x", "y", "z"}, rows);
    std::vector<std::vector<std::string>> evrows;
    for (const auto& e : traj.events)
      evrows.push_back({io::fmt17(e.t), to_string(e.type),
                        io::fmt17(e.point.x()), io::fmt17(e.point.y()),
                        io::fmt17(e.point.z())});
    io::write_csv(g.path(stem + "_events.csv"), {"t", "type", "x", "y", "z"},
                  evrows);
    out << "wrote " << g.path(stem + ".csv") << " and events\n";
  }
  if (g.wants("svg")) {
    std::vector<io::SvgCurve> curves;
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c"};
    int idx = 0;
    for (const auto& arc : traj.arcs) {
      io::SvgCurve c;
      c.color = colors[static_cast<int>(arc.kind) % 3];
      c.name = idx < 3 ? to_string(arc.kind) : "";
      for (const auto& p : arc.points) c.pts.emplace_back(p.x(), p.y());
      curves.push_back(std::move(c));
      ++idx;
    }
    io::SvgOptions so;
    so.title = "trajectory (x,y projection)";
    so.xlabel = "x";
    so.ylabel = "y";
    io::write_file(g.path(stem + ".svg"), io::render_svg(curves, so));
    out << "wrote " << g.path(stem + ".svg") << "\n";
  }
}

int cmd_classify(const GlobalOpts&, const std::string& system_path,
                 bool use_toy, bool toy_params_given, const toy::ToyParams& tp,
                 const std::string& point, std::ostream& out) {
  const FilippovSystem sys = resolve_system(system_path, use_toy, tp);
  const Vec3 p = parse_point(point);
  const TangencyInfo info = classify_tangency(sys, p);
  out << to_string(info.tag);
  if (info.tag == Tangency::Regular) {
    out << " region=" << to_string(classify_region(sys, p));
  }
  if (info.tag == Tangency::CuspFold) {
    // The template table comes from the system itself when it matches the
    // template, else from explicitly supplied toy parameters.
    std::optional<NormalFormSystem> nf = try_from_filippov(sys);
    if (!nf && (use_toy || toy_params_given)) nf = toy::to_normal_form(tp);
    try {
      const CuspFoldDegree deg = cuspfold_degree(sys, p, nf ? &*nf : nullptr);
      if (deg.kind == CuspFoldDegreeKind::Degree1)
        out << " degree=1 YXf=" << io::fmt6(deg.yxf);
      else if (deg.kind == CuspFoldDegreeKind::Degree2)
        out << " degree=2 L0=" << io::fmt6(deg.L0);
    } catch (const RequiresNormalForm&) {
      out << " degree=2 L0=unavailable(no template coefficient table)";
    }
  }
  if (info.tag != Tangency::Regular)
    out << " transversal=" << (info.transversal ? "yes" : "no");
  out << "\n";
  return 0;
}

int cmd_simulate(const GlobalOpts& g, const std::string& system_path,
                 bool use_toy, const toy::ToyParams& tp,
                 const std::string& x0, double t_max, std::ostream& out) {
  const FilippovSystem sys = resolve_system(system_path, use_toy, tp);
  const HybridTrajectory traj = simulate(sys, parse_point(x0), t_max);
  emit_trajectory(g, traj, "trajectory", out);
  out << "arcs=" << traj.arcs.size() << " events=" << traj.events.size()
      << "\n";
  return 0;
}

NormalFormSystem resolve_nf(const std::string& system_path, bool use_toy,
                            const toy::ToyParams& tp) {
  if (use_toy) return toy::to_normal_form(tp);
  if (system_path.empty()) throw ParseError("pass --system FILE or --toy");
  const FilippovSystem sys = io::load_system_json(system_path);
  auto nf = try_from_filippov(sys);
  if (!nf)
    throw RequiresNormalForm(
        "the system is not in the cusp-fold template form");
  return *nf;
}

int cmd_nf_clc(const GlobalOpts& g, const std::string& system_path,
               bool use_toy, const toy::ToyParams& tp, bool series,
               std::ostream& out) {
  const NormalFormSystem nf = resolve_nf(system_path, use_toy, tp);
  ClcOptions opts;
  opts.series_piy = series;
  const ClcSolution sol = find_clc(nf, opts);
  out << to_string(sol.kind) << " L=" << io::fmt6(sol.index_L);
  if (sol.kind == ClcKind::CLC || sol.kind == ClcKind::Polycycle)
    out << " p_minus=(" << io::fmt6(sol.p_minus.x()) << ","
        << io::fmt6(sol.p_minus.y()) << ") p_plus=("
        << io::fmt6(sol.p_plus.x()) << "," << io::fmt6(sol.p_plus.y()) << ")";
  if (!sol.note.empty()) out << " note=" << sol.note;
  out << "\n";
  if (g.wants("csv")) {
    io::write_csv(
        g.path("nf_clc.csv"),
        {"kind", "L", "x_minus", "y_minus", "x_plus", "y_plus"},
        {{to_string(sol.kind), io::fmt17(sol.index_L),
          io::fmt17(sol.p_minus.x()), io::fmt17(sol.p_minus.y()),
          io::fmt17(sol.p_plus.x()), io::fmt17(sol.p_plus.y())}});
  }
  return 0;
}

int cmd_nf_beta_star(const GlobalOpts& g, const std::string& system_path,
                     bool use_toy, const toy::ToyParams& tp, double c_min,
                     double c_max, int n, std::ostream& out) {
  const NormalFormSystem nf = resolve_nf(system_path, use_toy, tp);
  if (!(c_min > 0) || !(c_max > c_min) || n < 2)
    throw OutOfRange("need 0 < c-min < c-max and n >= 2");
  auto rows = grid_rows(n, g.jobs, [&](int i) -> std::vector<std::string> {
    const double c =
        c_min * std::pow(c_max / c_min, static_cast<double>(i) / (n - 1));
    const BetaStarResult r = beta_star(nf, c);
    return io::num_row({c, r.beta_star, r.x_star});
  });
  if (g.wants("csv"))
    io::write_csv(g.path("beta_star.csv"), {"c", "beta_star", "x_star"}, rows);
  if (g.wants("svg")) {
    io::SvgCurve curve;
    curve.name = "beta*(c)";
    curve.color = "#d62728";
    for (const auto& r : rows)
      curve.pts.emplace_back(std::stod(r[0]), std::stod(r[1]));
    io::SvgOptions so;
    so.title = "polycycle parameter curve";
    so.xlabel = "c";
    so.ylabel = "beta000*";
    io::write_file(g.path("beta_star.svg"), io::render_svg({curve}, so));
  }
  out << "wrote beta_star over [" << io::fmt6(c_min) << ", " << io::fmt6(c_max)
      << "] n=" << n << "\n";
  return 0;
}

int cmd_nf_nonexistence(const GlobalOpts& g, int trials, int control,
                        std::ostream& out) {
  HarnessConfig cfg;
  cfg.degree1_trials = trials;
  cfg.control_trials = control;
  cfg.seed = g.seed + 1;  // seed 0 stays a valid default
  cfg.jobs = g.jobs;
  const HarnessReport rep = nonexistence_harness(cfg);
  out << "degree1 trials=" << rep.degree1_trials
      << " violations=" << rep.degree1_violations
      << " | control trials=" << rep.control_trials
      << " clc_found=" << rep.control_found << "\n";
  for (const auto& v : rep.violations)
    out << "violation trial=" << v.trial << " c=" << io::fmt6(v.c) << " "
        << to_string(v.kind) << "\n";
  if (g.wants("csv")) {
    io::write_csv(g.path("nonexistence.csv"),
                  {"degree1_trials", "violations", "control_trials",
                   "control_found"},
                  {io::num_row({double(rep.degree1_trials),
                                double(rep.degree1_violations),
                                double(rep.control_trials),
                                double(rep.control_found)})});
  }
  return 0;
}

int cmd_jets_check(const GlobalOpts& g, int trials, const std::string& dump,
                   std::ostream& out) {
  std::mt19937_64 rng(g.seed + 99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double max_lin = 0, max_inv = 0;
  for (int t = 0; t < trials; ++t) {
    jets::BelowCoeffs bc;
    const double a0 = u(rng) > 0 ? 0.5 + std::abs(u(rng)) : -0.5 - std::abs(u(rng));
    const double b0 = u(rng);
    const double g100 = 0.5 + std::abs(u(rng));
    const double g010 = u(rng);
    if (g100 * a0 + g010 * b0 <= 0.4) {  // keep clear of degeneracy
      --t;
      continue;
    }
    bc.alpha = {{0, 0, 0, a0}, {1, 0, 0, 0.4 * u(rng)}, {0, 1, 0, 0.4 * u(rng)}};
    bc.beta = {{0, 0, 0, b0}, {1, 0, 0, 0.4 * u(rng)}, {0, 0, 1, 0.4 * u(rng)}};
    bc.gamma = {{1, 0, 0, g100},
                {0, 1, 0, g010},
                {2, 0, 0, 0.4 * u(rng)},
                {0, 2, 0, 0.4 * u(rng)}};
    const jets::ReturnMapSeries rm = jets::pi_y_series(bc);
    const double D = g100 * a0 + g010 * b0;
    Mat2 expect;
    expect << 1 - 2 * g100 * a0 / D, -2 * g010 * a0 / D, -2 * g100 * b0 / D,
        1 - 2 * g010 * b0 / D;
    max_lin = std::max(max_lin, (rm.linear() - expect).cwiseAbs().maxCoeff());

    // Involution through order 3 (simultaneous substitution of both
    // components).
    const auto piy = jets::pi_y_series_t<double>(bc);
    const int cap = 3;
    jets::Series<double> cx = piy.p1, cy = piy.p2;
    // P(P(x,y)) with simultaneous substitution.
    auto subst2 = [&](const jets::Series<double>& f) {
      const auto& sp = f.space();
      jets::Series<double> acc(cap);
      std::vector<jets::Series<double>> powx{jets::Series<double>::constant(1, cap)};
      std::vector<jets::Series<double>> powy{jets::Series<double>::constant(1, cap)};
      for (int m = 1; m <= cap; ++m) {
        powx.push_back(powx.back() * cx);
        powy.push_back(powy.back() * cy);
      }
      for (int i = 0; i < f.size(); ++i) {
        const auto& e = sp.expo[i];
        const double c = f.raw()[i];
        if (c == 0.0) continue;
        acc = acc + powx[e[1]] * powy[e[2]] * c;
      }
      return acc;
    };
    const jets::Series<double> ex = subst2(piy.p1) - jets::Series<double>::variable(jets::VarX, cap);
    const jets::Series<double> ey = subst2(piy.p2) - jets::Series<double>::variable(jets::VarY, cap);
    for (const double v : ex.raw()) max_inv = std::max(max_inv, std::abs(v));
    for (const double v : ey.raw()) max_inv = std::max(max_inv, std::abs(v));
  }
  out << "jets-check trials=" << trials << " max_linear_err=" << io::fmt6(max_lin)
      << " max_involution_err=" << io::fmt6(max_inv) << "\n";
  if (!dump.empty()) {
    const toy::ToyParams tp;
    const auto flow = jets::series_flow<double>(toy::to_normal_form(tp).coeffs(), 4);
    io::write_file(dump, jets::series_to_json(flow.z, {"t", "x", "y"}));
    out << "wrote " << dump << "\n";
  }
  return max_lin < 1e-10 && max_inv < 1e-9 ? 0 : 1;
}

int cmd_toy_bifset(const GlobalOpts& g, double b, double beta_min,
                   double beta_max, int n, std::ostream& out) {
  if (!(beta_max > beta_min) || n < 2)
    throw OutOfRange("need beta-max > beta-min and n >= 2");
  auto rows = grid_rows(n, g.jobs, [&](int i) -> std::vector<std::string> {
    const double beta = beta_min + (beta_max - beta_min) * i / (n - 1);
    if (!(beta > 0) || (b < 0 && !(beta < -1.0 / b)))
      return {io::fmt17(beta), "", "", "", ""};
    const toy::BifurcationCurves c = toy::bifurcation_curves(beta, b);
    return {io::fmt17(beta), io::fmt17(c.alpha_TS), io::fmt17(c.alpha_poly),
            io::fmt17(c.alpha_flip), c.flip_meaningful ? "flip" : ""};
  });
  if (g.wants("csv"))
    io::write_csv(g.path("toy_bifset.csv"),
                  {"beta", "alpha_TS", "alpha_poly", "alpha_flip", "label"},
                  rows);
  if (g.wants("svg")) {
    io::SvgCurve ts{"TS: alpha=beta", "#1f77b4", {}, 2.0, false};
    io::SvgCurve poly{"polycycle", "#d62728", {}, 2.0, false};
    io::SvgCurve flip{"flip", "#9467bd", {}, 2.0, true};
    for (const auto& r : rows) {
      if (r[1].empty()) continue;
      const double beta = std::stod(r[0]);
      ts.pts.emplace_back(beta, std::stod(r[1]));
      poly.pts.emplace_back(beta, std::stod(r[2]));
      if (r[4] == "flip") flip.pts.emplace_back(beta, std::stod(r[3]));
    }
    std::vector<io::SvgCurve> curves{ts, poly};
    if (!flip.pts.empty()) curves.push_back(flip);
    io::SvgOptions so;
    so.title = "toy model bifurcation set, b=" + io::fmt6(b);
    so.xlabel = "beta";
    so.ylabel = "alpha";
    io::write_file(g.path("toy_bifset.svg"), io::render_svg(curves, so));
  }
  out << "wrote toy_bifset (n=" << n << ")\n";
  return 0;
}

int cmd_toy_clc(const GlobalOpts& g, double b, double beta, double alpha,
                std::ostream& out) {
  toy::ToyParams tp{alpha, beta, b};
  const double t = toy::t_of_alpha(tp, alpha);
  const toy::ClcFamilyPoint fp = toy::clc_family(tp, t);
  std::string cls = "Polycycle";
  double delta = 0, tau = 0;
  if (t < 6 * beta - 1e-12) {
    const toy::ClcStability st = toy::clc_stability(tp, t);
    cls = to_string(st.cls);
    delta = st.delta_num;
    tau = st.tau;
  }
  out << "t=" << io::fmt6(t) << " x0=(" << io::fmt6(fp.x0) << ","
      << io::fmt6(fp.y0) << ") x1=(" << io::fmt6(fp.x1) << ","
      << io::fmt6(fp.y1) << ") class=" << cls << "\n";
  if (g.wants("csv"))
    io::write_csv(g.path("toy_clc.csv"),
                  {"t", "x0", "y0", "x1", "y1", "alpha", "delta", "tau",
                   "class"},
                  {{io::fmt17(t), io::fmt17(fp.x0), io::fmt17(fp.y0),
                    io::fmt17(fp.x1), io::fmt17(fp.y1),
                    io::fmt17(fp.alpha_of_t), io::fmt17(delta), io::fmt17(tau),
                    cls}});
  return 0;
}

int cmd_boost_ts(const GlobalOpts& g, double k_min, double k_max, int n,
                 std::ostream& out) {
  const auto [k1, k2] = boost::k_window();
  if (k_min <= k1 || k_max >= k2 || !(k_max > k_min) || n < 2)
    throw OutOfWindow("k range must sit inside (k1, k2) = (" +
                      io::fmt6(k1) + ", " + io::fmt6(k2) + ")");
  auto rows = grid_rows(n, g.jobs, [&](int i) -> std::vector<std::string> {
    const double k = k_min + (k_max - k_min) * i / (n - 1);
    return io::num_row({k, boost::ts_curve(k)});
  });
  if (g.wants("csv"))
    io::write_csv(g.path("boost_ts_curve.csv"), {"k", "a_TS"}, rows);
  if (g.wants("svg")) {
    io::SvgCurve c{"a_TS(k)", "#1f77b4", {}, 2.0, false};
    for (const auto& r : rows)
      c.pts.emplace_back(std::stod(r[0]), std::stod(r[1]));
    io::SvgOptions so;
    so.title = "boost converter: T-singularity curve";
    so.xlabel = "k";
    so.ylabel = "a";
    io::write_file(g.path("boost_ts_curve.svg"), io::render_svg({c}, so));
  }
  out << "wrote boost_ts_curve (n=" << n << ")\n";
  return 0;
}

int cmd_boost_polycycle(const GlobalOpts& g, double k_min, double k_max, int n,
                        std::ostream& out) {
  boost::BoostParams base;
  const boost::BifurcationCurve curve =
      boost::trace_polycycle_curve(base, k_min, k_max, n);
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : curve.points)
    rows.push_back(io::num_row({p.k, p.a, p.x0, p.y0, p.x1, p.y1, p.tau_plus,
                                p.tau_minus}));
  if (g.wants("csv"))
    io::write_csv(
        g.path("boost_polycycle.csv"),
        {"k", "a", "x0", "y0", "x1", "y1", "tau_plus", "tau_minus"}, rows);
  if (g.wants("svg")) {
    io::SvgCurve red{"polycycle", "#d62728", {}, 2.0, false};
    for (const auto& p : curve.points) red.pts.emplace_back(p.k, p.a);
    io::SvgCurve blue{"T-singularity", "#1f77b4", {}, 2.0, false};
    const auto [k1, k2] = boost::k_window();
    const int m = 160;
    for (int i = 1; i < m; ++i) {
      const double k = k1 + (k2 - k1) * i / m;
      try {
        blue.pts.emplace_back(k, boost::ts_curve(k));
      } catch (const OutOfWindow&) {
        // the window midpoint is the excluded degenerate point
      }
    }
    // Saddle-node line of pseudo-equilibria: drawn at the a_TS maximum for
    // visual completeness; no formula for it is asserted here.
    io::SvgCurve black{"saddle-node (unverified)", "#000000", {}, 1.5, true};
    const double a_max = boost::ts_curve(625.0 / 133.0 + 1e-9);
    black.pts.emplace_back(k1, a_max);
    black.pts.emplace_back(k2, a_max);
    io::SvgOptions so;
    so.title = "boost converter bifurcation set";
    so.xlabel = "k";
    so.ylabel = "a";
    io::write_file(g.path("boost_bifset.svg"),
                   io::render_svg({blue, red, black}, so));
  }
  out << "polycycle branch points=" << curve.points.size();
  if (curve.stalled_low) out << " (stalled at low k)";
  if (curve.stalled_high) out << " (stalled at high k)";
  out << "\n";
  return 0;
}

int cmd_boost_clc(const GlobalOpts& g, double k, double a, std::ostream& out) {
  boost::BoostParams p;
  p.k = k;
  p.a = a;
  const boost::SolveReport rep = boost::find_clc(p);
  if (!rep.converged || !rep.valid)
    throw NewtonDiverged("no valid CLC at (k, a): " + rep.note);
  const boost::ClosingState& s = rep.state;
  out << "CLC x0=(" << io::fmt6(s.x0) << "," << io::fmt6(s.y0) << ") x1=("
      << io::fmt6(s.x1) << "," << io::fmt6(s.y1)
      << ") tau+=" << io::fmt6(s.tau_plus) << " tau-=" << io::fmt6(s.tau_minus)
      << " residual=" << io::fmt6(rep.residual_norm) << "\n";
  if (g.wants("csv"))
    io::write_csv(
        g.path("boost_clc.csv"),
        {"k", "a", "x0", "y0", "x1", "y1", "tau_plus", "tau_minus"},
        {io::num_row({k, a, s.x0, s.y0, s.x1, s.y1, s.tau_plus, s.tau_minus})});
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"filippov-lab: numerical toolkit for 3D Filippov systems"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  GlobalOpts g;
  if (const char* env = std::getenv("FILIPPOV_LAB_OUT")) g.out_dir = env;
  app.add_option("--out", g.out_dir, "output directory");
  app.add_option("--formats", g.formats, "subset of csv,svg,json")
      ->delimiter(',');
  app.add_option("--seed", g.seed, "seed for randomized harnesses");
  app.add_option("--jobs", g.jobs, "parallel shards for grid scans");

  std::string system_path, point = "0,0,0", x0 = "0,0,1", dump;
  bool use_toy = false, use_series = false;
  toy::ToyParams tp{0.0, 1.0, -1.0 / 3.0};
  double t_max = 50, c_min = 1e-3, c_max = 1e-1;
  double b = -1.0 / 3.0, beta_min = 0.05, beta_max = 3.0, beta = 1.0,
         alpha = 0.85;
  double k_min = 1.1, k_max = 8.3, k = 6.0, a = 1.3;
  int n = 200, trials = 200, control = 50;

  bool toy_params_given = false;
  auto add_system_flags = [&](CLI::App* cmd) {
    cmd->add_option("--system", system_path, "system definition JSON");
    cmd->add_flag("--toy", use_toy, "use the toy model");
    auto mark = [&toy_params_given](double) { toy_params_given = true; };
    cmd->add_option_function<double>(
           "--alpha", [&, mark](double v) { tp.alpha = v; mark(v); },
           "toy alpha");
    cmd->add_option_function<double>(
           "--beta", [&, mark](double v) { tp.beta = v; mark(v); },
           "toy beta");
    cmd->add_option_function<double>(
           "--b", [&, mark](double v) { tp.b = v; mark(v); }, "toy b");
  };

  CLI::App* c_classify = app.add_subcommand("classify", "classify a Sigma point");
  add_system_flags(c_classify);
  c_classify->add_option("--point", point, "point x,y,z");

  CLI::App* c_sim = app.add_subcommand("simulate", "hybrid trajectory");
  add_system_flags(c_sim);
  c_sim->add_option("--x0", x0, "initial point x,y,z");
  c_sim->add_option("--t-max", t_max, "time horizon");

  CLI::App* c_clc = app.add_subcommand("nf-clc", "CLC of a template system");
  add_system_flags(c_clc);
  c_clc->add_flag("--series", use_series, "series-backed Pi_Y");

  CLI::App* c_bs = app.add_subcommand("nf-beta-star", "polycycle curve beta*(c)");
  add_system_flags(c_bs);
  c_bs->add_option("--c-min", c_min, "lower c");
  c_bs->add_option("--c-max", c_max, "upper c");
  c_bs->add_option("--n", n, "points");

  CLI::App* c_nx = app.add_subcommand("nf-nonexistence", "degree-1 sweep");
  c_nx->add_option("--trials", trials, "degree-1 draws");
  c_nx->add_option("--control-trials", control, "degree-2 control draws");

  CLI::App* c_jets = app.add_subcommand("jets-check", "series invariants");
  c_jets->add_option("--trials", trials, "random draws");
  c_jets->add_option("--dump", dump, "write a flow-series JSON");

  CLI::App* c_bif = app.add_subcommand("toy-bifset", "toy bifurcation set");
  c_bif->add_option("--b", b, "toy b");
  c_bif->add_option("--beta-min", beta_min, "lower beta");
  c_bif->add_option("--beta-max", beta_max, "upper beta");
  c_bif->add_option("--n", n, "points");

  CLI::App* c_tclc = app.add_subcommand("toy-clc", "analytic CLC point");
  c_tclc->add_option("--b", b, "toy b");
  c_tclc->add_option("--beta", beta, "toy beta");
  c_tclc->add_option("--alpha", alpha, "toy alpha");

  CLI::App* c_bts = app.add_subcommand("boost-ts-curve", "a_TS(k) samples");
  c_bts->add_option("--k-min", k_min, "lower k");
  c_bts->add_option("--k-max", k_max, "upper k");
  c_bts->add_option("--n", n, "points");

  CLI::App* c_bp = app.add_subcommand("boost-polycycle", "polycycle branch");
  c_bp->add_option("--k-min", k_min, "lower k");
  c_bp->add_option("--k-max", k_max, "upper k");
  c_bp->add_option("--n", n, "target points");

  CLI::App* c_bc = app.add_subcommand("boost-clc", "CLC at fixed (k, a)");
  c_bc->add_option("--k", k, "load parameter");
  c_bc->add_option("--a", a, "control parameter");

  std::string active = "filippov-lab";
  {
    const std::set<std::string> names{
        "classify",     "simulate",        "nf-clc",        "nf-beta-star",
        "nf-nonexistence", "jets-check",   "toy-bifset",    "toy-clc",
        "boost-ts-curve",  "boost-polycycle", "boost-clc"};
    if (!args.empty() && names.count(args.front())) active = args.front();
  }
  try {
    std::vector<const char*> argv;
    argv.push_back("filippov-lab");
    for (const auto& s : args) argv.push_back(s.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
    for (const auto* sub :
         {c_classify, c_sim, c_clc, c_bs, c_nx, c_jets, c_bif, c_tclc, c_bts,
          c_bp, c_bc})
      if (sub->parsed()) active = sub->get_name();

    for (const auto& f : g.formats)
      if (f != "csv" && f != "svg" && f != "json") {
        err << active << ": unknown format \"" << f << "\"\n";
        return 2;
      }
    for (double v : {tp.alpha, tp.beta, tp.b, t_max, c_min, c_max, b, beta_min,
                     beta_max, beta, alpha, k_min, k_max, k, a})
      if (!std::isfinite(v)) {
        err << active << ": numeric overrides must be finite\n";
        return 2;
      }

    if (c_classify->parsed())
      return cmd_classify(g, system_path, use_toy, toy_params_given, tp, point,
                          out);
    if (c_sim->parsed())
      return cmd_simulate(g, system_path, use_toy, tp, x0, t_max, out);
    if (c_clc->parsed())
      return cmd_nf_clc(g, system_path, use_toy, tp, use_series, out);
    if (c_bs->parsed())
      return cmd_nf_beta_star(g, system_path, use_toy, tp, c_min, c_max, n, out);
    if (c_nx->parsed()) return cmd_nf_nonexistence(g, trials, control, out);
    if (c_jets->parsed()) return cmd_jets_check(g, trials, dump, out);
    if (c_bif->parsed()) return cmd_toy_bifset(g, b, beta_min, beta_max, n, out);
    if (c_tclc->parsed()) return cmd_toy_clc(g, b, beta, alpha, out);
    if (c_bts->parsed()) return cmd_boost_ts(g, k_min, k_max, n, out);
    if (c_bp->parsed()) return cmd_boost_polycycle(g, k_min, k_max, n, out);
    if (c_bc->parsed()) return cmd_boost_clc(g, k, a, out);
    err << "filippov-lab: no subcommand\n";
    return 2;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help and friends print through CLI11's machinery.
      out << app.help();
      return 0;
    }
    err << active << ": " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << active << ": [" << e.code() << "] " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << active << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace fillab::cli
