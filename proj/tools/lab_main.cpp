#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <random>

#include "ergolab/bohr.hpp"
#include "ergolab/certificates.hpp"
#include "ergolab/lab.hpp"
#include "ergolab/roth.hpp"
#include "ergolab/weyl.hpp"

using namespace ergolab;

namespace {

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidInput, "cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidInput, path + ": " + e.what());
  }
}

TorusPoint parse_point(const std::string& text, std::size_t dim, const Rational& fill) {
  if (text.empty()) return TorusPoint::constant(dim, fill);
  std::vector<Rational> c;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    c.push_back(parse_rational(text.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (c.size() != dim) fail(ErrorKind::InvalidInput, "point has " + std::to_string(c.size()) + " coordinates, expected " +
                                                         std::to_string(dim));
  return TorusPoint(std::move(c));
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput: return 2;
    case ErrorKind::Refuted: return 3;
    case ErrorKind::NotCombinable:
    case ErrorKind::Exhausted: return 4;
    default: return 5;
  }
}

struct BallOptions {
  std::string beta = "sqrt2,sqrt3";
  std::string maxden = "1000000";
  std::string center;
  std::size_t k = 1;
  std::string eps = "1/8";
  bool generating = true;

  void attach(CLI::App* app) {
    app->add_option("--beta", beta, "comma list of p/q literals or names (sqrt2, golden, ...)");
    app->add_option("--maxden", maxden, "denominator cap for named frequencies");
    app->add_option("--center", center, "comma list of p/q (default all 0)");
    app->add_option("--k", k, "number of free coordinates");
    app->add_option("--eps", eps, "ball width p/q");
  }
  BohrHammingBall build() const {
    const Frequency f = parse_frequency(beta, BigInt(maxden), generating);
    return BohrHammingBall(f, ApproxHammingBall(parse_point(center, f.dim(), 0), k, parse_rational(eps)));
  }
};

void print_verification(const Certificate& C, const Verification& v) {
  nlohmann::json out = {{"ok", v.ok},        {"density_ok", v.density_ok}, {"count", v.count},
                        {"N", C.N},          {"k", C.k},                   {"S_size", C.S.size()},
                        {"message", v.message}};
  if (v.violating_s) out["violating_s"] = *v.violating_s;
  std::cout << out.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ergolab: recurrence and nonrecurrence laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("config", config_path)->required();

  auto* list = app.add_subcommand("list-experiments", "list experiment ids");

  auto* bohr = app.add_subcommand("bohr", "Bohr-Hamming balls");
  bohr->require_subcommand(1);
  auto* bohr_enum = bohr->add_subcommand("enum", "enumerate BH or sqrt(BH) in [1, N]");
  BallOptions ball;
  ball.attach(bohr_enum);
  std::int64_t N = 1000;
  bool sqrt_mode = false;
  bohr_enum->add_option("--N", N);
  bohr_enum->add_flag("--sqrt", sqrt_mode, "enumerate { n : n^2 in BH }");

  auto* weyl = app.add_subcommand("weyl", "Weyl system averages");
  weyl->require_subcommand(1);
  auto* weyl_avg = weyl->add_subcommand("avg", "unweighted triple-correlation average and L3 closed form");
  std::string alpha_spec = "sqrt2", f_path, maxden = "1000000000";
  std::int64_t weyl_N = 100000;
  weyl_avg->add_option("--alpha", alpha_spec);
  weyl_avg->add_option("--maxden", maxden);
  weyl_avg->add_option("--f", f_path, "trig polynomial JSON [{a, b, re, im}]")->required();
  weyl_avg->add_option("--N", weyl_N);

  auto* roth = app.add_subcommand("roth", "3AP forms");
  roth->require_subcommand(1);
  auto* roth_check = roth->add_subcommand("check", "direct vs spectral I and the quotient gap on random functions");
  std::uint64_t roth_q = 5, roth_seed = 1;
  int roth_d = 2, roth_trials = 10;
  std::vector<int> free_axes{1};
  roth_check->add_option("--q", roth_q);
  roth_check->add_option("--d", roth_d);
  roth_check->add_option("--trials", roth_trials);
  roth_check->add_option("--seed", roth_seed);
  roth_check->add_option("--free-axes", free_axes, "axes spanning K");

  auto* cert = app.add_subcommand("cert", "nonrecurrence certificates");
  cert->require_subcommand(1);
  std::string cert_in, cert_in2, cert_out;
  auto* cv = cert->add_subcommand("verify", "verify a certificate file");
  cv->add_option("file", cert_in)->required();
  auto* cb = cert->add_subcommand("build", "band witness plus rotation certificate");
  std::size_t cb_k = 1;
  std::string cb_eta = "1/4", cb_q = "1000003";
  std::int64_t cb_N = 100000;
  std::uint64_t cb_seed = 1;
  cb->add_option("--k", cb_k);
  cb->add_option("--eta", cb_eta);
  cb->add_option("--q", cb_q, "shared denominator of beta");
  cb->add_option("--N", cb_N);
  cb->add_option("--seed", cb_seed);
  cb->add_option("--out", cert_out)->required();
  auto* cc = cert->add_subcommand("combine", "certificate for S1 u m S2");
  std::int64_t m = 2, m_max = 10;
  cc->add_option("first", cert_in)->required();
  cc->add_option("second", cert_in2)->required();
  cc->add_option("--m", m);
  cc->add_option("--out", cert_out);
  auto* cs = cert->add_subcommand("search-m", "smallest m that combines");
  cs->add_option("first", cert_in)->required();
  cs->add_option("second", cert_in2)->required();
  cs->add_option("--mmax", m_max);
  cs->add_option("--out", cert_out);
  auto* csq = cert->add_subcommand("square", "rewrite S as its squares and re-verify");
  csq->add_option("file", cert_in)->required();
  csq->add_option("--out", cert_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = ExperimentConfig::from_json(read_json(config_path));
      const auto rep = run_experiment(cfg);
      std::cout << rep.to_json().dump(2) << "\n";
      return rep.status == Status::Pass ? 0 : rep.status == Status::Refuted ? 3 : 4;
    }
    if (*list) {
      for (const auto& e : list_experiments()) std::cout << e.id << "\t" << e.summary << "\n";
      return 0;
    }
    if (*bohr_enum) {
      const auto bh = ball.build();
      const IntSet s = sqrt_mode ? sqrt_set_enumerate(bh, N).elems : bh_enumerate(bh, N);
      std::cout << set_to_json(s, N).dump() << "\n";
      return 0;
    }
    if (*weyl_avg) {
      const WeylSystem W(parse_frequency(alpha_spec, BigInt(maxden), true));
      const TrigPoly f = trig_from_json(read_json(f_path));
      const auto trace = l3_average(W, f, weyl_N);
      nlohmann::json cps = nlohmann::json::array();
      for (const auto& c : trace.checkpoints) cps.push_back({c.N, c.value});
      const Complex L3 = l3_closed_form(f);
      std::cout << nlohmann::json{{"trace", cps}, {"L3", {L3.real(), L3.imag()}}, {"metadata", trace.metadata}}.dump(2)
                << "\n";
      return 0;
    }
    if (*roth_check) {
      std::mt19937_64 rng(roth_seed);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      const auto K = coordinate_subgroup(roth_d, roth_q, free_axes);
      nlohmann::json rows = nlohmann::json::array();
      for (int t = 0; t < roth_trials; ++t) {
        GridFunction f0(roth_d, roth_q), f1(roth_d, roth_q), f2(roth_d, roth_q);
        for (auto* f : {&f0, &f1, &f2})
          for (std::size_t i = 0; i < f->size(); ++i) (*f)[i] = Complex(u(rng), 0.0);
        const auto v = roth_form(f0, f1, f2);
        const auto gap = quotient_gap_bound(f0, f1, f2, K);
        rows.push_back({{"I_direct", v.direct.real()}, {"I_spectral", v.spectral.real()}, {"gap", gap.gap}, {"bound", gap.bound}});
      }
      std::cout << rows.dump(2) << "\n";
      return 0;
    }
    if (*cv) {
      const auto C = read_certificate(cert_in);
      const auto v = verify_certificate(C);
      print_verification(C, v);
      return v.ok ? 0 : 1;
    }
    if (*cb) {
      const auto W = build_band_witness(cb_k, parse_rational(cb_eta), 100000, cb_seed);
      std::vector<std::string> names;
      for (unsigned long D = 2; names.size() < W.E.r; ++D) {
        unsigned long s = 0;
        while ((s + 1) * (s + 1) <= D) ++s;
        if (s * s != D) names.push_back("sqrt" + std::to_string(D));
      }
      const auto C = rotation_certificate(W.E, W.U, lattice_frequency(names, BigInt(cb_q)), cb_N);
      write_certificate(cert_out, C);
      std::cout << to_json(W).dump(2) << "\n";
      print_verification(C, verify_certificate(C));
      return 0;
    }
    if (*cc || *cs) {
      const auto C1 = read_certificate(cert_in), C2 = read_certificate(cert_in2);
      const auto out = *cc ? combine_certificates(C1, C2, m) : search_min_m(C1, C2, m_max);
      nlohmann::json j = {{"ok", out.ok}, {"m", out.m}, {"diagnostics", out.diagnostics}};
      if (out.ok) {
        j["S"] = out.cert.S;
        j["deltaPrime"] = format_rational(out.cert.delta);
        if (!cert_out.empty()) write_certificate(cert_out, out.cert);
      }
      std::cout << j.dump(2) << "\n";
      return out.ok ? 0 : 4;
    }
    if (*csq) {
      const auto C = square_certificate(read_certificate(cert_in));
      if (!cert_out.empty()) write_certificate(cert_out, C);
      print_verification(C, verify_certificate(C));
      return 0;
    }
  } catch (const LabError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  }
  return 0;
}
