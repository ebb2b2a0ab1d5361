// so3bt: batch runner for the algebra, Toeplitz, kernel and knot experiments.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "so3bt/bt_operators.hpp"
#include "so3bt/knot_theory.hpp"
#include "so3bt/quantum_torus.hpp"

namespace {

using namespace so3bt;
using nlohmann::json;

constexpr int kUsage = 1;
constexpr int kAssertion = 2;

struct Row {
  std::string experiment;
  std::string knot;
  std::optional<int> r;
  std::string quantity;
  double value = 0.0;
};

struct Config {
  double tau_re = 0.0;
  double tau_im = 1.0;
  std::vector<int> levels;
  int grid_n = 0;  // 0: per-level default
  std::uint64_t seed = 7;
  std::string knot = "figure_eight";
  std::string output_path;
  std::string format = "csv";

  ComplexStructure tau() const { return {tau_re, tau_im}; }
};

// Raw flag values; only flags given on the command line override the config file.
struct Flags {
  std::string config_path;
  std::string tau;
  std::string levels;
  int grid_n = 0;
  std::uint64_t seed = 0;
  std::string knot;
  std::string output_path;
  std::string format;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw DomainError("bad level '" + item + "'");
    }
    if (used != item.size()) throw DomainError("bad level '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::pair<double, double> parse_pair(const std::string& text, const std::string& what) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw DomainError(what + " must be 'x,y', got '" + text + "'");
  try {
    std::size_t u1 = 0, u2 = 0;
    const std::string a = text.substr(0, comma), b = text.substr(comma + 1);
    const double x = std::stod(a, &u1), y = std::stod(b, &u2);
    if (u1 != a.size() || u2 != b.size()) throw std::invalid_argument("trailing");
    return {x, y};
  } catch (const std::invalid_argument&) {
    throw DomainError(what + " must be 'x,y', got '" + text + "'");
  }
}

Config load_config(const Flags& f, const CLI::App& app, const std::vector<int>& default_levels) {
  Config c;
  c.levels = default_levels;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw DomainError("cannot open config " + f.config_path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw DomainError("config " + f.config_path + ": " + e.what());
    }
    if (!j.is_object()) throw DomainError("config must be a JSON object");
    try {
      for (const auto& [key, value] : j.items()) {
        if (key == "tau") {
          if (value.is_array() && value.size() == 2) {
            c.tau_re = value[0].get<double>();
            c.tau_im = value[1].get<double>();
          } else {
            c.tau_re = value.at("re").get<double>();
            c.tau_im = value.at("im").get<double>();
          }
        } else if (key == "levels") {
          c.levels = value.get<std::vector<int>>();
        } else if (key == "grid_n") {
          c.grid_n = value.get<int>();
          if (c.grid_n < 64) throw DomainError("grid_n must be >= 64");
        } else if (key == "seed") {
          c.seed = value.get<std::uint64_t>();
        } else if (key == "knot") {
          c.knot = value.get<std::string>();
        } else if (key == "output_path") {
          c.output_path = value.get<std::string>();
        } else if (key == "format") {
          c.format = value.get<std::string>();
        } else {
          throw DomainError("unknown config key '" + key + "'");
        }
      }
    } catch (const json::exception& e) {
      throw DomainError("config " + f.config_path + ": " + e.what());
    }
  }
  if (app.count("--tau")) std::tie(c.tau_re, c.tau_im) = parse_pair(f.tau, "--tau");
  if (app.count("--levels")) c.levels = parse_levels(f.levels);
  if (app.count("--grid")) {
    if (f.grid_n < 64) throw DomainError("--grid must be >= 64");
    c.grid_n = f.grid_n;
  }
  if (app.count("--seed")) c.seed = f.seed;
  if (app.count("--knot")) c.knot = f.knot;
  if (app.count("--output")) c.output_path = f.output_path;
  if (app.count("--format")) c.format = f.format;

  if (c.levels.empty()) throw DomainError("levels must be nonempty");
  for (std::size_t i = 1; i < c.levels.size(); ++i) {
    if (c.levels[i] <= c.levels[i - 1]) throw DomainError("levels must be increasing");
  }
  if (c.format != "csv" && c.format != "json") throw DomainError("format must be csv or json");
  c.tau().validate();
  knot_from_name(c.knot);
  return c;
}

std::string render(const std::vector<Row>& rows, const std::string& format) {
  std::ostringstream os;
  if (format == "csv") {
    os << "experiment,knot,r,quantity,value\n";
    for (const auto& row : rows) {
      os << row.experiment << ',' << row.knot << ',' << (row.r ? std::to_string(*row.r) : "") << ','
         << row.quantity << ',' << fmt(row.value) << '\n';
    }
    return os.str();
  }
  json out = json::array();
  for (const auto& row : rows) {
    out.push_back({{"experiment", row.experiment},
                   {"knot", row.knot},
                   {"r", row.r ? json(*row.r) : json(nullptr)},
                   {"quantity", row.quantity},
                   {"value", row.value}});
  }
  return out.dump(2) + "\n";
}

void emit(const Config& c, const std::vector<Row>& rows) {
  const std::string text = render(rows, c.format);
  if (c.output_path.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(c.output_path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + c.output_path);
  out << text;
}

void summary(const Config& c, const std::string& line) {
  (c.output_path.empty() ? std::cerr : std::cout) << line << std::endl;
}

std::vector<Row> from_report(const std::string& experiment, const std::string& knot,
                             const std::vector<ReportRow>& rows) {
  std::vector<Row> out;
  for (const auto& r : rows) {
    out.push_back({experiment, knot, r.r > 0 ? std::optional<int>(r.r) : std::nullopt, r.quantity, r.value});
  }
  return out;
}

// Each subcommand registers its options and a runner returning the exit code.
struct Command {
  CLI::App* app = nullptr;
  Flags flags;
  std::vector<int> default_levels;
  std::function<int(const Config&)> run;
};

void common_options(Command& cmd) {
  auto* a = cmd.app;
  a->add_option("--config", cmd.flags.config_path, "JSON config file; flags override its values");
  a->add_option("--tau", cmd.flags.tau, "complex structure as 're,im' (default 0,1)");
  a->add_option("--levels", cmd.flags.levels, "comma-separated increasing levels r");
  a->add_option("--grid", cmd.flags.grid_n, "quadrature grid size (>= 64; default per level)");
  a->add_option("--seed", cmd.flags.seed, "random seed (default 7)");
  a->add_option("--knot", cmd.flags.knot, "unknot, trefoil or figure_eight (default figure_eight)");
  a->add_option("--output", cmd.flags.output_path, "result file (default stdout)");
  a->add_option("--format", cmd.flags.format, "csv or json (default csv)");
}

std::string join_values(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%.6g", i ? " " : "", v[i]);
    s += buf;
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"so3bt experiments"};
  app.require_subcommand(1);
  std::vector<std::unique_ptr<Command>> commands;
  auto add = [&](CLI::App* parent, const std::string& name, const std::string& help, std::vector<int> levels) {
    auto cmd = std::make_unique<Command>();
    cmd->app = parent->add_subcommand(name, help);
    cmd->default_levels = std::move(levels);
    common_options(*cmd);
    commands.push_back(std::move(cmd));
    return commands.back().get();
  };

  auto* algebra = app.add_subcommand("algebra", "quantum torus experiments");
  auto* bt = app.add_subcommand("bt", "Toeplitz operator sweeps");
  auto* kernel = app.add_subcommand("kernel", "projector kernel checks");
  auto* knot = app.add_subcommand("knot", "knot state experiments");
  for (auto* group : {algebra, bt, kernel, knot}) group->require_subcommand(1);

  // algebra verify
  int verify_r = 0, trials = 100, bound = 4;
  double verify_tol = 1e-10;
  auto* verify = add(algebra, "verify", "random check of the representation identity", {5});
  verify->app->add_option("--r", verify_r, "single level (shorthand for --levels r)");
  verify->app->add_option("--trials", trials, "random pairs per level (default 100)");
  verify->app->add_option("--bound", bound, "support bound (default 4)");
  verify->app->add_option("--tol", verify_tol, "max-entry tolerance (default 1e-10)");
  verify->run = [&](const Config& c) {
    std::vector<Row> rows;
    double worst = 0.0;
    try {
      const std::vector<int> levels = verify_r > 0 ? std::vector<int>{verify_r} : c.levels;
      for (int r : levels) {
        const auto rep = verify_isomorphism(QuantizationLevel(r), trials, bound, c.seed + r, verify_tol);
        rows.push_back({"algebra_verify", "", r, "max_deviation", rep.max_deviation});
        worst = std::max(worst, rep.max_deviation);
      }
    } catch (const VerificationError& e) {
      emit(c, rows);
      summary(c, std::string("algebra verify: FAIL ") + e.what());
      return kAssertion;
    }
    emit(c, rows);
    char buf[160];
    std::snprintf(buf, sizeof buf, "algebra verify: PASS max deviation %.3g over %d trials per level", worst, trials);
    summary(c, buf);
    return 0;
  };

  // algebra span
  int degree = 6;
  auto* span = add(algebra, "span", "lattice classes reached by products of the generators", {1});
  span->app->add_option("--degree", degree, "maximal product length (default 6)");
  span->run = [&](const Config& c) {
    const auto classes = span_closure(degree);
    std::vector<Row> rows;
    for (const auto& [a, b] : classes) {
      rows.push_back({"algebra_span", "", std::nullopt, "class:" + std::to_string(a) + ":" + std::to_string(b), 1.0});
    }
    const bool unit = classes.contains({0, 0});
    rows.push_back({"algebra_span", "", std::nullopt, "classes", static_cast<double>(classes.size())});
    rows.push_back({"algebra_span", "", std::nullopt, "unit_reached", unit ? 1.0 : 0.0});
    emit(c, rows);
    summary(c, "algebra span: REPORT " + std::to_string(classes.size()) + " classes at degree " +
                   std::to_string(degree) + ", (0,0) " + (unit ? "reached" : "not reached"));
    return 0;
  };

  // bt residual
  std::string vector_text = "1,0";
  auto* residual = add(bt, "residual", "curve operator against the Toeplitz operator of its symbol", {5, 10, 20, 40});
  residual->app->add_option("--vector", vector_text, "lattice vector 'a,b' (default 1,0)");
  residual->run = [&](const Config& c) {
    const auto [va, vb] = parse_pair(vector_text, "--vector");
    const LatticeVector v{static_cast<int>(va), static_cast<int>(vb)};
    if (v.a != va || v.b != vb || (v.a == 0 && v.b == 0)) throw DomainError("--vector must be a nonzero integer pair");
    const auto res = symbol_residual(c.levels, c.tau(), v);
    std::vector<Row> rows;
    bool decreasing = true;
    for (std::size_t i = 0; i < res.size(); ++i) {
      rows.push_back({"bt_residual", "", c.levels[i], "residual_" + std::to_string(v.a) + "_" + std::to_string(v.b),
                      res[i]});
      if (i > 0) decreasing = decreasing && res[i] < res[i - 1];
    }
    emit(c, rows);
    summary(c, std::string("bt residual: REPORT ") + join_values(res) +
                   (decreasing ? " (strictly decreasing)" : " (not monotone)"));
    return 0;
  };

  // bt normlimit
  std::string normlimit_vector = "1,0";
  auto* normlimit = add(bt, "normlimit", "operator norm of T(F_v) against sup |F_v|", {10, 20, 40, 50});
  normlimit->app->add_option("--vector", normlimit_vector, "lattice vector of the curve symbol (default 1,0)");
  normlimit->run = [&](const Config& c) {
    const auto [va, vb] = parse_pair(normlimit_vector, "--vector");
    const TrigSymbol f = TrigSymbol::curve({static_cast<int>(va), static_cast<int>(vb)});
    const auto rep = norm_limit_check(c.tau(), f, c.levels);
    emit(c, from_report("bt_normlimit", "", rep.rows()));
    std::vector<double> gaps;
    for (const auto& e : rep.entries) gaps.push_back(e.gap);
    summary(c, "bt normlimit: REPORT sup " + fmt(rep.sup) + ", gaps " + join_values(gaps));
    return 0;
  };

  // kernel decay
  double separation = 0.5;
  auto* decay = add(kernel, "decay", "off-diagonal decay of the projector kernel", {5, 10, 20, 40});
  decay->app->add_option("--separation", separation, "q-separation in [0.1, 0.5] (default 0.5)");
  decay->run = [&](const Config& c) {
    try {
      const auto rep = kernel_decay_check(c.levels, c.tau(), separation);
      emit(c, from_report("kernel_decay", "", rep.rows()));
      summary(c, "kernel decay: PASS slope " + fmt(rep.slope));
      return 0;
    } catch (const NonDecaying& e) {
      emit(c, {});
      summary(c, std::string("kernel decay: FAIL ") + e.what());
      return kAssertion;
    }
  };

  // kernel gaussian
  std::vector<std::string> offsets_text{"0.05,0"};
  auto* gaussian = add(kernel, "gaussian", "near-diagonal kernel against its Gaussian form", {10, 20, 40});
  gaussian->app->add_option("--offset", offsets_text, "offset 'dp,dq' (repeatable; default 0.05,0)");
  gaussian->run = [&](const Config& c) {
    std::vector<std::pair<double, double>> offsets;
    for (const auto& t : offsets_text) offsets.push_back(parse_pair(t, "--offset"));
    const auto rep = kernel_gaussian_check(c.levels, c.tau(), offsets);
    emit(c, from_report("kernel_gaussian", "", rep.rows()));
    std::vector<double> errs;
    for (const auto& e : rep.entries) errs.push_back(e.max_rel_error);
    summary(c, "kernel gaussian: REPORT relative errors " + join_values(errs));
    return 0;
  };

  // knot options shared by aj and volume
  std::string weighting = "quantum_dimension", root = "a4", symbol_knot, poly_text;
  bool raw_norm = false, mirror = false, no_abelian = false;
  auto state_options = [&](Command* cmd) {
    cmd->app->add_option("--weighting", weighting, "flat or quantum_dimension (default quantum_dimension)")
        ->check(CLI::IsMember({"flat", "quantum_dimension"}));
    cmd->app->add_option("--root", root, "q = A^4 (a4, default) or q = A^2 (a2)")->check(CLI::IsMember({"a4", "a2"}));
    cmd->app->add_flag("--raw", raw_norm, "skip the 3-sphere normalization factor");
    cmd->app->add_flag("--mirror", mirror, "mirror image of the knot");
  };
  auto make_options = [&] {
    KnotStateOptions o;
    o.weighting = weighting == "flat" ? Weighting::Flat : Weighting::QuantumDimension;
    o.root = root == "a2" ? QRoot::A2 : QRoot::A4;
    o.tqft_normalization = !raw_norm;
    o.mirror = mirror;
    return o;
  };

  // knot aj
  auto* aj = add(knot, "aj", "residual of the A-polynomial operator on the knot state", {5, 10, 20, 40});
  state_options(aj);
  aj->app->add_option("--symbol-knot", symbol_knot, "take the A-polynomial of this knot instead (mismatch control)");
  aj->app->add_option("--poly", poly_text, "explicit polynomial in m, l instead of a built-in one");
  aj->app->add_flag("--no-abelian", no_abelian, "drop the factor (l - 1)");
  aj->run = [&](const Config& c) {
    const Knot k = knot_from_name(c.knot);
    const LaurentML p = !poly_text.empty() ? LaurentML::parse(poly_text)
                                           : builtin_apolynomial(symbol_knot.empty() ? c.knot : symbol_knot, !no_abelian);
    std::vector<Row> rows;
    std::vector<double> values;
    for (int r : c.levels) {
      const double res = aj_residual(p, knot_state(k, r, make_options()), c.tau(), c.grid_n);
      rows.push_back({"knot_aj", c.knot, r, "aj_residual", res});
      values.push_back(res);
    }
    emit(c, rows);
    summary(c, "knot aj: REPORT " + c.knot + " with " + p.to_string() + ": " + join_values(values));
    return 0;
  };

  // knot volume
  auto* volume = add(knot, "volume", "(pi / r) log of the squared knot state norm", {25, 50, 100, 200});
  state_options(volume);
  volume->run = [&](const Config& c) {
    const Knot k = knot_from_name(c.knot);
    const auto v = volume_sequence(k, c.levels, make_options());
    const double vol = simplicial_volume_oracle(k);
    std::vector<Row> rows;
    for (std::size_t i = 0; i < v.size(); ++i) rows.push_back({"knot_volume", c.knot, c.levels[i], "volume", v[i]});
    rows.push_back({"knot_volume", c.knot, std::nullopt, "oracle", vol});
    emit(c, rows);
    summary(c, "knot volume: REPORT " + c.knot + " " + join_values(v) + " against " + fmt(vol));
    return 0;
  };

  // knot mahler
  std::string mahler_poly;
  int mahler_grid = 512, refine = 2;
  auto* mahler = add(knot, "mahler", "Mahler measure of a polynomial or of a built-in A-polynomial", {1});
  mahler->app->add_option("--poly", mahler_poly, "polynomial in m, l (default: A-polynomial of --knot)");
  mahler->app->add_option("--refine", refine, "grid doublings (default 2)");
  mahler->app->add_flag("--no-abelian", no_abelian, "drop the factor (l - 1) from a built-in polynomial");
  mahler->run = [&](const Config& c) {
    const bool builtin = mahler_poly.empty();
    const LaurentML p = builtin ? builtin_apolynomial(c.knot, !no_abelian) : LaurentML::parse(mahler_poly);
    const auto res = mahler_measure(p, c.grid_n > 0 ? c.grid_n : mahler_grid, refine);
    const std::string label = builtin ? c.knot : "";
    std::vector<Row> rows;
    for (std::size_t i = 0; i < res.raw.size(); ++i) {
      rows.push_back({"knot_mahler", label, std::nullopt, "raw_grid_" + std::to_string((c.grid_n > 0 ? c.grid_n : mahler_grid) << i),
                      res.raw[i]});
    }
    rows.push_back({"knot_mahler", label, std::nullopt, "mahler", res.value});
    if (builtin) rows.push_back({"knot_mahler", label, std::nullopt, "volume_oracle", simplicial_volume_oracle(c.knot)});
    emit(c, rows);
    summary(c, "knot mahler: REPORT m(" + p.to_string() + ") = " + fmt(res.value));
    return 0;
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  for (const auto& cmd : commands) {
    if (!cmd->app->parsed()) continue;
    try {
      const Config c = load_config(cmd->flags, *cmd->app, cmd->default_levels);
      return cmd->run(c);
    } catch (const VerificationError& e) {
      std::cerr << "assertion failed: " << e.what() << "\n";
      return kAssertion;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kUsage;
    }
  }
  return kUsage;
}
