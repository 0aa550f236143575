// lumpcorr: symbols, gap curves, roots, 1D convergence tables and FEM runs.
//
// Exit codes: 0 success, 2 usage error, 3 numeric failure, 4 I/O error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lumpcorr/dispersion.hpp"
#include "lumpcorr/experiments.hpp"
#include "lumpcorr/mesh.hpp"
#include "lumpcorr/report.hpp"

using namespace lumpcorr;

namespace {

constexpr int exit_usage = 2;
constexpr int exit_numeric = 3;
constexpr int exit_io = 4;

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw IoError("cannot open " + path + " for writing");
  f << text;
  if (!f)
    throw IoError("failed writing " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw IoError("cannot open " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (s.empty() || pos != s.size() || !std::isfinite(v))
    throw UsageError("bad " + what + " '" + s + "'");
  return v;
}

int parse_int(const std::string& s, const std::string& what) {
  const double v = parse_double(s, what);
  if (v != std::floor(v) || std::abs(v) > 1e9)
    throw UsageError("bad " + what + " '" + s + "'");
  return static_cast<int>(v);
}

std::vector<Scheme> parse_schemes(const std::string& list) {
  std::vector<Scheme> out;
  for (const auto& tok : split(list, ',')) {
    try {
      out.push_back(Scheme::parse(tok));
    } catch (const DomainError&) {
      throw UsageError("bad scheme '" + tok + "' (use L, G or a correction count)");
    }
  }
  if (out.empty())
    throw UsageError("need at least one scheme");
  return out;
}

OutputFormat parse_format(const std::string& s) {
  if (s == "csv")
    return OutputFormat::Csv;
  if (s == "markdown" || s == "md")
    return OutputFormat::Markdown;
  throw UsageError("format must be csv or markdown");
}

// Zero parts print as 0, never -0.
std::string symbol_text(Symbol w) {
  return format_full(w.real() + 0.0) + "," + format_full(w.imag() + 0.0);
}

// Appends "--key value" for every key=value line of the --config file whose
// key is not already on the command line, so explicit flags win. Flags take
// true/false.
std::vector<std::string> merge_config(std::vector<std::string> args, const CLI::App& app) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      path = args[i].substr(9);
  }
  if (path.empty() || args.size() < 2)
    return args;
  const CLI::App* sub = nullptr;
  for (const auto* s : app.get_subcommands({}))
    if (s->get_name() == args[1])
      sub = s;
  if (!sub)
    return args;
  auto given = [&](const std::string& key) {
    for (const auto& a : args)
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0)
        return true;
    return false;
  };
  std::istringstream in(read_file(path));
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#' || line[first] == ';')
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(line_no) + ": expected key=value");
    auto trim = [](std::string v) {
      const auto a = v.find_first_not_of(" \t\r\"");
      const auto b = v.find_last_not_of(" \t\r\"");
      return a == std::string::npos ? std::string() : v.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const CLI::Option* opt = nullptr;
    try {
      opt = sub->get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
    }
    if (!opt || key == "config")
      throw UsageError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (given(key))
      continue;
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1")
        args.push_back("--" + key);
      else if (value != "false" && value != "0")
        throw UsageError(path + ":" + std::to_string(line_no) + ": flag '" + key +
                         "' takes true or false");
    } else {
      args.push_back("--" + key);
      args.push_back(value);
    }
  }
  return args;
}

// --- symbols ---------------------------------------------------------------

struct SymbolsArgs {
  double lambda = 0.0;
  double kappa = 0.0;
  double h = 0.0;
  double p = 0.0;
  int n = 1;
  double t = 0.1;
  std::string out;
};

std::string cmd_symbols(const SymbolsArgs& a) {
  const SchemeParams sp{a.lambda, a.kappa, a.h, a.p};
  sp.validate();
  if (a.n < 0)
    throw UsageError("--n must be non-negative");
  if (!(a.t >= 0.0))
    throw UsageError("--t must be non-negative");
  const Symbol exact = exact_symbol(sp);
  std::string s;
  s += "z=" + format_full(sp.z()) + "\n";
  s += "omega_exact=" + symbol_text(exact) + "\n";
  s += "omega_L=" + symbol_text(lumped_symbol(sp)) + "\n";
  for (int m = 1; m <= a.n; ++m)
    s += "omega_" + std::to_string(m) + "=" + symbol_text(corrected_symbol(m, sp)) + "\n";
  s += "omega_G=" + symbol_text(consistent_symbol(sp)) + "\n";
  auto rel = [&](const Scheme& k) {
    return a.p == 0.0 ? 0.0 : evolve_symbol_exact(k, sp, a.t).rel_err;
  };
  s += "rel_err_L=" + format_compact(rel(Scheme::lumped())) + "\n";
  for (int m = 1; m <= a.n; ++m)
    s += "rel_err_" + std::to_string(m) + "=" + format_compact(rel(Scheme::corrected(m))) + "\n";
  s += "rel_err_G=" + format_compact(rel(Scheme::consistent())) + "\n";
  return s;
}

// --- curves ----------------------------------------------------------------

struct CurvesArgs {
  std::optional<double> mu;
  bool pure = false;
  bool fig4 = false;
  std::string mu_range = "0:20:200";
  int nmax = 4;
  double zmax = std::numbers::pi;
  int samples = 1000;
  std::string out;
};

std::string cmd_curves(const CurvesArgs& a) {
  if (a.fig4) {
    const auto parts = split(a.mu_range, ':');
    if (parts.size() != 3)
      throw UsageError("--mu-range must be start:stop:count");
    const double lo = parse_double(parts[0], "mu start");
    const double hi = parse_double(parts[1], "mu stop");
    const int count = parse_int(parts[2], "mu count");
    if (count < 2 || !(hi > lo) || lo < 0.0)
      throw UsageError("--mu-range needs 0 <= start < stop and count >= 2");
    std::vector<TextRow> rows;
    for (int i = 0; i < count; ++i) {
      const double mu = lo + (hi - lo) * i / (count - 1);
      const auto root = smallest_positive_root(GapKind::F, 1, mu, std::numbers::pi);
      rows.push_back({format_full(mu), format_full(threshold(ThresholdKind::Z0, mu)),
                      root ? format_full(root->root) : "nan"});
    }
    return csv({"mu", "z0", "z_tilde"}, rows);
  }
  if (a.pure == a.mu.has_value())
    throw UsageError("give exactly one of --mu or --pure");
  if (a.samples < 2)
    throw UsageError("--samples must be at least 2");
  if (a.nmax < 1)
    throw UsageError("--nmax must be at least 1");
  if (!(a.zmax > 0.0))
    throw UsageError("--zmax must be positive");
  const std::string f = a.pure ? "ft_" : "f_";
  const std::string g = a.pure ? "gt_" : "g_";
  TextRow header{"z"};
  for (int n = 1; n <= a.nmax; ++n)
    header.push_back(f + std::to_string(n));
  for (int n = 1; n <= a.nmax; ++n)
    header.push_back(g + std::to_string(n));
  const GapKind fk = a.pure ? GapKind::FTilde : GapKind::F;
  const GapKind gk = a.pure ? GapKind::GTilde : GapKind::G;
  std::vector<TextRow> rows;
  for (int i = 0; i < a.samples; ++i) {
    const double z = a.zmax * i / (a.samples - 1);
    TextRow r{format_full(z)};
    for (int n = 1; n <= a.nmax; ++n)
      r.push_back(format_full(gap_function(fk, n, z, a.mu)));
    for (int n = 1; n <= a.nmax; ++n)
      r.push_back(format_full(gap_function(gk, n, z, a.mu)));
    rows.push_back(std::move(r));
  }
  return csv(header, rows);
}

// --- roots -----------------------------------------------------------------

struct RootsArgs {
  double lambda = 0.0;
  double kappa = 0.0;
  double p = 0.0;
  std::optional<double> length;
  std::string out;
};

std::string cmd_roots(const RootsArgs& a) {
  if (!(a.kappa > 0.0))
    throw UsageError("roots need --kappa > 0");
  if (a.p == 0.0)
    throw UsageError("roots need --p != 0");
  if (a.length && !(*a.length > 0.0))
    throw UsageError("--length must be positive");
  const double mu = a.lambda / (a.kappa * a.p);
  const double pi = std::numbers::pi;
  std::string s;
  s += "mu=" + format_full(mu) + "\n";
  s += "z0=" + format_full(threshold(ThresholdKind::Z0, mu)) + "\n";
  s += "z_star=" + format_full(threshold(ThresholdKind::ZStar, mu)) + "\n";
  try {
    s += "psi=" + format_full(threshold(ThresholdKind::Psi, mu)) + "\n";
  } catch (const DomainError&) {
    s += "psi=none\n";
  }
  auto nodes = [&](double root) {
    return static_cast<long long>(std::ceil(*a.length * std::abs(a.p) / root)) + 1;
  };
  auto root_line = [&](const std::string& name, GapKind kind, int n) {
    const auto r = smallest_positive_root(kind, n, mu, pi);
    if (!r)
      return name + "=none\n";
    std::string line = name + "=" + format_full(r->root);
    if (a.length)
      line += " nodes=" + std::to_string(nodes(r->root));
    return line + "\n";
  };
  s += root_line("z_tilde", GapKind::F, 1);
  for (int n = 1; n <= 4; ++n)
    s += root_line("root_f" + std::to_string(n), GapKind::F, n);
  for (int n = 1; n <= 4; ++n)
    s += root_line("root_g" + std::to_string(n), GapKind::G, n);
  if (a.length) {
    // Node counts past which the first two corrections beat their
    // predecessors: f_1, f_2, g_1, g_2, g_3.
    const std::pair<GapKind, int> order[] = {
        {GapKind::F, 1}, {GapKind::F, 2}, {GapKind::G, 1}, {GapKind::G, 2}, {GapKind::G, 3}};
    std::string list;
    for (const auto& [kind, n] : order) {
      const auto r = smallest_positive_root(kind, n, mu, pi);
      if (!list.empty())
        list += ",";
      list += r ? std::to_string(nodes(r->root)) : "none";
    }
    s += "thresholds=" + list + "\n";
  }
  return s;
}

// --- convergence -----------------------------------------------------------

struct ConvergenceArgs {
  int example = 1;
  std::optional<double> kappa;
  std::string ns = "501,601,701,801,901,1001,1101,1201,1501,2501";
  std::string schemes = "L,1,2,3,G";
  std::string mode = "symbol";
  std::optional<double> t;
  std::string format = "csv";
  std::string out;
};

std::string cmd_convergence(const ConvergenceArgs& a) {
  if (a.example != 1 && a.example != 2)
    throw UsageError("convergence tables exist for examples 1 and 2");
  auto hm = std::get<Harmonic1D>(benchmark_example(a.example));
  if (a.kappa) {
    if (!(*a.kappa >= 0.0))
      throw UsageError("--kappa must be non-negative");
    hm.kappa = *a.kappa;
  }
  std::vector<int> ns;
  for (const auto& tok : split(a.ns, ','))
    ns.push_back(parse_int(tok, "node count"));
  for (int n : ns)
    if (n < 3)
      throw UsageError("node counts must be at least 3");
  ConvergenceMode mode;
  if (a.mode == "symbol")
    mode = ConvergenceMode::SymbolExact;
  else if (a.mode == "time-stepped")
    mode = ConvergenceMode::TimeStepped;
  else
    throw UsageError("--mode must be symbol or time-stepped");
  const auto schemes = parse_schemes(a.schemes);
  const double t = a.t ? *a.t : benchmark_time(a.example);
  std::vector<SchemePair> pairs;
  for (const auto& pr : default_pairs(hm.kappa == 0.0)) {
    const auto has = [&](const Scheme& s) {
      return std::find(schemes.begin(), schemes.end(), s) != schemes.end();
    };
    if (has(pr.first) && has(pr.second))
      pairs.push_back(pr);
  }
  const auto table = run_convergence_1d(hm, ns, schemes, pairs, mode, t);
  return parse_format(a.format) == OutputFormat::Csv ? convergence_csv(table)
                                                     : convergence_markdown(table);
}

// --- femrun ----------------------------------------------------------------

struct FemArgs {
  int example = 3;
  std::string mesh;
  std::string schemes = "1,2,3,4,G";
  double tau = 0.0;
  std::optional<double> t_end;
  std::uint64_t seed = 1;
  double amplitude = 0.3;
  std::string save_mesh;
  std::string format = "csv";
  std::string out;
};

std::vector<int> parse_counts(const std::string& s) {
  std::vector<int> out;
  for (const auto& tok : split(s, ','))
    out.push_back(parse_int(tok, "node count"));
  if (out.empty() || out.size() > 3)
    throw UsageError("need 1 to 3 node counts");
  return out;
}

SimplicialMesh build_mesh(const FemArgs& a) {
  const auto parts = split(a.mesh, ':');
  if (!parts.empty() && parts[0] == "structured") {
    if (parts.size() != 2)
      throw UsageError("use structured:NX,NY[,NZ]");
    const auto counts = parse_counts(parts[1]);
    return structured_simplicial(static_cast<int>(counts.size()), counts);
  }
  if (!parts.empty() && parts[0] == "perturbed") {
    if (parts.size() < 2 || parts.size() > 4)
      throw UsageError("use perturbed:NX,NY[,NZ][:amplitude[:seed]]");
    const auto counts = parse_counts(parts[1]);
    const double amp = parts.size() > 2 ? parse_double(parts[2], "amplitude") : a.amplitude;
    std::uint64_t seed = a.seed;
    if (parts.size() > 3) {
      const int v = parse_int(parts[3], "seed");
      if (v < 0)
        throw UsageError("seed must be non-negative");
      seed = static_cast<std::uint64_t>(v);
    }
    return perturb_interior(structured_simplicial(static_cast<int>(counts.size()), counts), amp,
                            seed);
  }
  return read_mesh(read_file(a.mesh));
}

std::string cmd_femrun(const FemArgs& a) {
  if (a.example < 1 || a.example > 7)
    throw UsageError("examples are numbered 1 to 7");
  if (a.mesh.empty())
    throw UsageError("--mesh is required");
  if (a.tau < 0.0)
    throw UsageError("--tau must be non-negative");
  const auto sol = benchmark_example(a.example);
  const auto schemes = parse_schemes(a.schemes);
  const double t_end = a.t_end ? *a.t_end : benchmark_time(a.example);
  if (!(t_end >= 0.0))
    throw UsageError("--t-end must be non-negative");
  const auto mesh = build_mesh(a);
  if (mesh.dim != dimension(sol))
    throw UsageError("example " + std::to_string(a.example) + " needs a " +
                     std::to_string(dimension(sol)) + "D mesh");
  if (!a.save_mesh.empty())
    write_output(a.save_mesh, write_mesh(mesh));
  StepOptions opt;
  opt.tau = a.tau;
  const auto results = run_fem(sol, mesh, schemes, t_end, opt);
  return parse_format(a.format) == OutputFormat::Csv ? fem_csv(results)
                                                     : fem_markdown(results, a.mesh);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lumped-mass correction schemes: symbols, gap curves, roots, convergence "
               "tables and FEM runs"};
  app.require_subcommand(1);

  std::string config_path;
  SymbolsArgs sa;
  auto* sym = app.add_subcommand("symbols", "Exact, lumped, corrected and consistent symbols");
  sym->set_help_flag("--help", "Print this help message and exit");
  sym->add_option("--config", config_path, "Flat key=value file; flags override it");
  sym->add_option("--lambda", sa.lambda, "Convection speed")->required();
  sym->add_option("--kappa", sa.kappa, "Diffusion coefficient")->required();
  sym->add_option("--h", sa.h, "Mesh spacing")->required();
  sym->add_option("--p", sa.p, "Wave number")->required();
  sym->add_option("--n", sa.n, "Highest correction count")->capture_default_str();
  sym->add_option("--t", sa.t, "Time for the harmonic errors")->capture_default_str();
  sym->add_option("--out", sa.out, "Output file (default stdout)");

  CurvesArgs ca;
  double mu_value = 0.0;
  auto* cur = app.add_subcommand("curves", "Gap functions on [0, zmax] as CSV");
  cur->add_option("--config", config_path, "Flat key=value file; flags override it");
  auto* mu_opt = cur->add_option("--mu", mu_value, "mu = lambda / (kappa p)");
  cur->add_flag("--pure", ca.pure, "Pure-transport (tilde) functions");
  cur->add_flag("--fig4", ca.fig4, "z0 and the first root of f_1 against mu");
  cur->add_option("--mu-range", ca.mu_range, "start:stop:count for --fig4")->capture_default_str();
  cur->add_option("--nmax", ca.nmax, "Highest n")->capture_default_str();
  cur->add_option("--zmax", ca.zmax, "Upper end of the z grid")->capture_default_str();
  cur->add_option("--samples", ca.samples, "Number of z samples")->capture_default_str();
  cur->add_option("--out", ca.out, "Output file (default stdout)");

  RootsArgs ra;
  double length_value = 0.0;
  auto* roo = app.add_subcommand("roots", "Thresholds, roots and node-count bounds");
  roo->add_option("--config", config_path, "Flat key=value file; flags override it");
  roo->add_option("--lambda", ra.lambda, "Convection speed")->required();
  roo->add_option("--kappa", ra.kappa, "Diffusion coefficient")->required();
  roo->add_option("--p", ra.p, "Wave number")->required();
  auto* len_opt = roo->add_option("--length", length_value, "Domain length for node counts");
  roo->add_option("--out", ra.out, "Output file (default stdout)");

  ConvergenceArgs va;
  double kappa_value = 0.0, t_value = 0.0;
  auto* con = app.add_subcommand("convergence", "1D error table with empirical orders");
  con->add_option("--config", config_path, "Flat key=value file; flags override it");
  con->add_option("--example", va.example, "1 or 2")->capture_default_str();
  auto* kap_opt = con->add_option("--kappa", kappa_value, "Override the diffusion coefficient");
  con->add_option("--ns", va.ns, "Comma-separated node counts")->capture_default_str();
  con->add_option("--schemes", va.schemes, "Comma-separated schemes")->capture_default_str();
  con->add_option("--mode", va.mode, "symbol or time-stepped")->capture_default_str();
  auto* t_opt = con->add_option("--t", t_value, "Final time (default per example)");
  con->add_option("--format", va.format, "csv or markdown")->capture_default_str();
  con->add_option("--out", va.out, "Output file (default stdout)");

  FemArgs fa;
  double t_end_value = 0.0;
  auto* fem = app.add_subcommand("femrun", "Multi-D finite-element run of one example");
  fem->add_option("--config", config_path, "Flat key=value file; flags override it");
  fem->add_option("--example", fa.example, "3 to 7 (or 1, 2 with a 1D mesh)")
      ->capture_default_str();
  fem->add_option("--mesh", fa.mesh,
                  "structured:NX,NY[,NZ], perturbed:NX,NY[,NZ][:amplitude[:seed]] or a mesh file")
      ->required();
  fem->add_option("--schemes", fa.schemes, "Comma-separated schemes")->capture_default_str();
  fem->add_option("--tau", fa.tau, "Cap on the starting time step (0: stability step)")
      ->capture_default_str();
  auto* tend_opt = fem->add_option("--t-end", t_end_value, "Final time (default per example)");
  fem->add_option("--seed", fa.seed, "Seed when the perturbed mesh option gives none")
      ->capture_default_str();
  fem->add_option("--amplitude", fa.amplitude, "Amplitude when the perturbed mesh option gives none")
      ->capture_default_str();
  fem->add_option("--save-mesh", fa.save_mesh, "Also write the mesh used");
  fem->add_option("--format", fa.format, "csv or markdown")->capture_default_str();
  fem->add_option("--out", fa.out, "Output file (default stdout)");

  try {
    auto args = merge_config(std::vector<std::string>(argv, argv + argc), app);
    args.erase(args.begin());
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return exit_usage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return exit_io;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_usage;
  }

  try {
    if (*sym) {
      write_output(sa.out, cmd_symbols(sa));
    } else if (*cur) {
      if (*mu_opt)
        ca.mu = mu_value;
      write_output(ca.out, cmd_curves(ca));
    } else if (*roo) {
      if (*len_opt)
        ra.length = length_value;
      write_output(ra.out, cmd_roots(ra));
    } else if (*con) {
      if (*kap_opt)
        va.kappa = kappa_value;
      if (*t_opt)
        va.t = t_value;
      write_output(va.out, cmd_convergence(va));
    } else if (*fem) {
      if (*tend_opt)
        fa.t_end = t_end_value;
      write_output(fa.out, cmd_femrun(fa));
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return exit_usage;
  } catch (const DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return exit_usage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return exit_io;
  } catch (const ParseError& e) {
    std::cerr << "mesh file error: " << e.what() << "\n";
    return exit_io;
  } catch (const Error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return exit_numeric;
  }
  return 0;
}
