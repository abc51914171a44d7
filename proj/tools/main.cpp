#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "expiso/diagonal.hpp"
#include "expiso/explorer.hpp"
#include "expiso/grid_io.hpp"
#include "expiso/suites.hpp"

// Command-line front end: analytic profile tables, grid measurement and
// symmetrisation, the verification suites, the symmetric-measure
// counterexample, and randomized scans.  Output on stdout is byte-identical
// for identical invocations; human-readable summaries go to stderr.
//
// Exit codes: 0 all-pass, 1 any fail verdict, 2 usage error,
// 3 inconclusive-only outcomes.

namespace {

using expiso::GridSet;
using expiso::GridSpec;
using expiso::Point;
using expiso::VerificationReport;
using nlohmann::json;

struct CommonOpts {
  int n = 2;
  double delta = 0.0;   // 0: dimension default
  double x_max = 0.0;
  std::uint64_t seed = 1;
  int trials = 8;
  std::vector<double> h_ladder;
  std::string out;
  std::string format = "json";
  bool metadata = false;
};

GridSpec resolve_grid(const CommonOpts& o) {
  const GridSpec def = expiso::default_grid(o.n);
  return GridSpec(o.n, o.delta > 0.0 ? o.delta : def.delta, o.x_max > 0.0 ? o.x_max : def.x_max);
}

void add_grid_flags(CLI::App* cmd, CommonOpts& o, bool with_trials = true) {
  cmd->set_help_flag("--help", "Print help");
  cmd->add_option("--n", o.n, "Ambient dimension (2 or 3)")->check(CLI::Range(2, 3));
  cmd->add_option("--delta", o.delta, "Grid spacing (default per dimension)");
  cmd->add_option("--xmax", o.x_max, "Truncation bound per axis (default per dimension)");
  cmd->add_option("--seed", o.seed, "Seed for randomized families");
  if (with_trials) cmd->add_option("--trials", o.trials, "Randomized trials")->check(CLI::PositiveNumber);
  cmd->add_option("--h", o.h_ladder, "Dilation height (repeatable; multiples of delta)");
  cmd->add_option("--out", o.out, "Write the machine-readable payload to this path");
  cmd->add_option("--format", o.format, "Payload format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_flag("--metadata", o.metadata, "Attach a metadata block (timestamps; nondeterministic)");
}

void attach_metadata(json& payload, const CommonOpts& o) {
  if (!o.metadata) return;
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  payload["metadata"] = {
      {"unix_time", std::chrono::duration_cast<std::chrono::seconds>(now).count()}};
}

void emit(const CommonOpts& o, const std::string& text) {
  std::cout << text;
  if (!o.out.empty()) {
    std::ofstream os(o.out);
    if (!os) throw std::runtime_error("cannot open output path " + o.out);
    os << text;
  }
}

int exit_code_for(const std::vector<VerificationReport>& reports) {
  bool any_fail = false, any_pass = false, any_inconclusive = false;
  for (const auto& r : reports) {
    switch (r.verdict) {
      case expiso::Verdict::fail: any_fail = true; break;
      case expiso::Verdict::pass: any_pass = true; break;
      default: any_inconclusive = true; break;
    }
  }
  if (any_fail) return 1;
  if (any_inconclusive && !any_pass) return 3;
  return 0;
}

void print_summary(const std::vector<VerificationReport>& reports) {
  for (const auto& r : reports) {
    std::string label = r.check_name;
    if (r.parameters.contains("input")) {
      label += "(" + r.parameters["input"].get<std::string>() + ")";
    }
    std::fprintf(stderr, "%-14s %-42s margin=% .6e tol=%.3e\n",
                 to_string(r.verdict), label.c_str(), r.margin, r.tolerance);
  }
}

std::string reports_csv(const std::vector<VerificationReport>& reports) {
  std::ostringstream os;
  os << "check_name,input,verdict,passed,margin,tolerance\n";
  char buf[64];
  for (const auto& r : reports) {
    const std::string input =
        r.parameters.contains("input") ? r.parameters["input"].get<std::string>() : "";
    os << r.check_name << ',' << input << ',' << to_string(r.verdict) << ','
       << (r.passed ? 1 : 0) << ',';
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", r.margin, r.tolerance);
    os << buf;
  }
  return os.str();
}

int finish_reports(const CommonOpts& o, std::vector<VerificationReport> reports) {
  print_summary(reports);
  if (o.format == "csv") {
    emit(o, reports_csv(reports));
  } else {
    json payload = expiso::to_json(reports);
    if (o.metadata) {
      json wrapped{{"reports", payload}};
      attach_metadata(wrapped, o);
      payload = wrapped;
    }
    emit(o, payload.dump(2) + "\n");
  }
  return exit_code_for(reports);
}

/// "cx,cy[,cz],r;cx,cy[,cz],r;..."
void parse_balls(const std::string& text, int n, std::vector<Point>& centers,
                 std::vector<double>& radii) {
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ';')) {
    if (part.empty()) continue;
    std::stringstream ps(part);
    std::string field;
    std::vector<double> vals;
    while (std::getline(ps, field, ',')) vals.push_back(std::stod(field));
    if (static_cast<int>(vals.size()) != n + 1) {
      throw CLI::ValidationError("--balls", "each ball needs " + std::to_string(n) +
                                                " center coordinates and a radius");
    }
    Point c{0.0, 0.0, 0.0};
    for (int ax = 0; ax < n; ++ax) c[static_cast<std::size_t>(ax)] = vals[static_cast<std::size_t>(ax)];
    centers.push_back(c);
    radii.push_back(vals.back());
  }
  if (centers.empty()) throw CLI::ValidationError("--balls", "no balls given");
}

GridSet load_or_build(const CommonOpts& o, const std::string& in_path, const std::string& balls) {
  if (!in_path.empty() && !balls.empty()) {
    throw CLI::ValidationError("--in/--balls", "give exactly one input source");
  }
  if (!in_path.empty()) return expiso::read_gridset(in_path);
  if (balls.empty()) throw CLI::ValidationError("--in/--balls", "an input source is required");
  std::vector<Point> centers;
  std::vector<double> radii;
  parse_balls(balls, o.n, centers, radii);
  return GridSet::from_ball_union(resolve_grid(o), centers, radii);
}

json measure_json(const GridSet& s) {
  const auto m = s.measure();
  json j = expiso::gridset_header_json(s);
  j["measure"] = {{"value", m.value}, {"error_bound", m.error_bound}};
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exponential-measure isoperimetry toolkit"};
  app.set_help_flag("--help", "Print help");
  app.set_config("--config", "", "Config file (key=value; [subcommand] sections)");
  app.fallthrough();  // lets --config appear after the subcommand name
  app.require_subcommand(1);

  CommonOpts profile_o;
  int profile_points = 99;
  profile_o.format = "csv";
  auto* profile_cmd = app.add_subcommand("profile", "Isoperimetric profile table over a measure grid");
  add_grid_flags(profile_cmd, profile_o, false);
  profile_cmd->add_option("--points", profile_points, "Interior grid points")->check(CLI::PositiveNumber);

  CommonOpts sym_o;
  std::string sym_in, sym_balls, sym_out;
  auto* sym_cmd = app.add_subcommand("symmetrize", "Anchor every anti-diagonal section at the x axis");
  add_grid_flags(sym_cmd, sym_o, false);
  sym_cmd->add_option("--in", sym_in, "Input grid-set raster");
  sym_cmd->add_option("--balls", sym_balls, "Synthesize the input: cx,cy,r;...");
  sym_cmd->add_option("--set-out", sym_out, "Output grid-set raster path")->required();
  std::string sym_profile_out;
  sym_cmd->add_option("--profile-out", sym_profile_out, "Also write the section profile as CSV (t, f)");

  CommonOpts verify_o;
  std::string suite;
  auto* verify_cmd = app.add_subcommand("verify", "Run a verification suite");
  add_grid_flags(verify_cmd, verify_o);
  verify_cmd->add_option("--suite", suite,
                         "trapezoid|component|poisson|neighborhood|symmetrisation|reduction|isoperimetry|all")
      ->required();

  CommonOpts ce_o;
  auto* ce_cmd = app.add_subcommand("counterexample",
                                    "Halfplane vs ball under the symmetric exponential measure");
  ce_cmd->set_help_flag("--help", "Print help");
  ce_cmd->add_option("--out", ce_o.out, "Write the report to this path");
  ce_cmd->add_option("--format", ce_o.format, "Payload format")->check(CLI::IsMember({"json", "csv"}));
  ce_cmd->add_flag("--metadata", ce_o.metadata, "Attach a metadata block");

  CommonOpts scan_o;
  scan_o.trials = 20;
  int scan_balls_min = 1, scan_balls_max = 3, scan_refinements = 2;
  double scan_rmin = 0.5, scan_rmax = 2.0;
  std::string scan_witness;
  auto* scan_cmd = app.add_subcommand("scan", "Randomized isoperimetry scan over seeded ball unions");
  add_grid_flags(scan_cmd, scan_o);
  scan_cmd->add_option("--balls-min", scan_balls_min, "Fewest balls per set")->check(CLI::PositiveNumber);
  scan_cmd->add_option("--balls-max", scan_balls_max, "Most balls per set")->check(CLI::PositiveNumber);
  scan_cmd->add_option("--rmin", scan_rmin, "Smallest ball radius");
  scan_cmd->add_option("--rmax", scan_rmax, "Largest ball radius");
  scan_cmd->add_option("--max-refinements", scan_refinements, "Grid halvings for near-violations");
  scan_cmd->add_option("--witness-out", scan_witness, "Write the minimal-margin witness set here");

  CommonOpts measure_o;
  std::string measure_in, measure_balls;
  auto* measure_cmd = app.add_subcommand("measure", "Measure a grid set with its error budget");
  add_grid_flags(measure_cmd, measure_o, false);
  measure_cmd->add_option("--in", measure_in, "Input grid-set raster");
  measure_cmd->add_option("--balls", measure_balls, "Synthesize the input: cx,cy,r;...");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (profile_cmd->parsed()) {
      std::vector<double> ps;
      for (int i = 1; i <= profile_points; ++i) {
        ps.push_back(static_cast<double>(i) / (profile_points + 1));
      }
      const auto rows = expiso::profile_curve(profile_o.n, ps);
      if (profile_o.format == "csv") {
        std::ostringstream os;
        os << "p,kind,radius,boundary\n";
        char buf[96];
        for (const auto& r : rows) {
          std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%.17g\n", r.p, to_string(r.kind), r.radius,
                        r.boundary);
          os << buf;
        }
        emit(profile_o, os.str());
      } else {
        json arr = json::array();
        for (const auto& r : rows) {
          arr.push_back({{"p", r.p}, {"kind", to_string(r.kind)}, {"radius", r.radius},
                         {"boundary", r.boundary}});
        }
        emit(profile_o, arr.dump(2) + "\n");
      }
      return 0;
    }

    if (sym_cmd->parsed()) {
      const GridSet a = load_or_build(sym_o, sym_in, sym_balls);
      if (a.spec().n != 2) throw std::invalid_argument("symmetrize: n = 2 only");
      const GridSet c = expiso::symmetrize(a);
      expiso::write_gridset(sym_out, c);
      if (!sym_profile_out.empty()) {
        std::ofstream os(sym_profile_out);
        if (!os) throw std::runtime_error("cannot open " + sym_profile_out);
        expiso::write_profile_csv(os, expiso::profile_of(c));
      }
      json payload{{"input", measure_json(a)}, {"output", measure_json(c)}, {"set_out", sym_out}};
      attach_metadata(payload, sym_o);
      emit(sym_o, payload.dump(2) + "\n");
      return 0;
    }

    if (verify_cmd->parsed()) {
      expiso::SuiteConfig cfg;
      cfg.n = verify_o.n;
      cfg.grid = resolve_grid(verify_o);
      cfg.seed = verify_o.seed;
      cfg.trials = verify_o.trials;
      cfg.h_ladder = verify_o.h_ladder;
      return finish_reports(verify_o, expiso::run_suite(suite, cfg));
    }

    if (ce_cmd->parsed()) {
      return finish_reports(ce_o, {expiso::counterexample_check()});
    }

    if (scan_cmd->parsed()) {
      expiso::ScanConfig cfg;
      cfg.n = scan_o.n;
      cfg.grid = resolve_grid(scan_o);
      cfg.seed = scan_o.seed;
      cfg.trials = scan_o.trials;
      cfg.balls_per_set = {scan_balls_min, scan_balls_max};
      cfg.radius_range = {scan_rmin, scan_rmax};
      cfg.h_ladder = scan_o.h_ladder;
      cfg.max_refinements = scan_refinements;
      const auto res = expiso::conjecture_scan(cfg);
      std::fprintf(stderr, "scan: %d pass, %d inconclusive, %d fail; min margin % .6e (trial %d)\n",
                   res.pass, res.inconclusive, res.fail, res.min_margin, res.min_margin_trial);
      json payload = expiso::to_json(res, cfg);
      attach_metadata(payload, scan_o);
      emit(scan_o, payload.dump(2) + "\n");
      if (!scan_witness.empty() && res.min_margin_trial >= 0) {
        expiso::write_gridset(scan_witness,
                              GridSet::from_ball_union(cfg.grid, res.min_margin_witness.centers,
                                                       res.min_margin_witness.radii));
      }
      if (res.fail > 0) return 1;
      if (res.pass == 0 && res.inconclusive > 0) return 3;
      return 0;
    }

    if (measure_cmd->parsed()) {
      const GridSet a = load_or_build(measure_o, measure_in, measure_balls);
      json payload = measure_json(a);
      attach_metadata(payload, measure_o);
      emit(measure_o, payload.dump(2) + "\n");
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
