// cvtomo: simulate, reconstruct and benchmark continuous-variable state
// tomography datasets. Subcommands: simulate, reconstruct, benchmark,
// fidelity, inspect. Options can come from a JSON config (--config) with
// command-line flags taking precedence; every run emits a resolved-config
// JSON that reproduces it.

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cvtomo/assemble.hpp"
#include "cvtomo/fock.hpp"
#include "cvtomo/metrics.hpp"
#include "cvtomo/povm.hpp"
#include "cvtomo/serialize.hpp"
#include "cvtomo/simulate.hpp"
#include "cvtomo/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cvtomo;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- config

void check_keys(const json& j, const std::string& context,
                const std::set<std::string>& allowed) {
  if (!j.is_object()) throw InputError(context + ": expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw InputError(context + ": unknown key \"" + key + "\"");
}

const std::set<std::string> kStateKeys = {"name", "beta", "squeeze_r"};
const std::set<std::string> kGridKeys = {"nx", "np", "x_max", "p_max"};
const std::set<std::string> kHomodyneKeys = {"angles", "bins", "x_max"};
const std::set<std::string> kSolverKeys = {"max_iters", "eps_rel", "eps_feas",
                                           "stall_window"};

struct StateConfig {
  std::string name = "cat";
  double beta = 2.0;
  double squeeze_r = 0.5;

  TestStateSpec spec(int dim) const {
    TestStateSpec s;
    s.name = test_state_from_name(name);
    s.beta = beta;
    s.squeeze_r = squeeze_r;
    s.dim = FockDim(dim);
    return s;
  }
  json to_json() const {
    return {{"name", name}, {"beta", beta}, {"squeeze_r", squeeze_r}};
  }
  void from_json(const json& j) {
    check_keys(j, "state", kStateKeys);
    name = j.value("name", name);
    beta = j.value("beta", beta);
    squeeze_r = j.value("squeeze_r", squeeze_r);
  }
};

struct GridConfig {
  int nx = 25;
  int np = 25;
  double x_max = 6.0;
  double p_max = 6.0;

  PhaseSpaceGrid grid() const { return PhaseSpaceGrid{x_max, p_max, nx, np}; }
  json to_json() const {
    return {{"nx", nx}, {"np", np}, {"x_max", x_max}, {"p_max", p_max}};
  }
  void from_json(const json& j) {
    check_keys(j, "grid", kGridKeys);
    nx = j.value("nx", nx);
    np = j.value("np", np);
    x_max = j.value("x_max", x_max);
    p_max = j.value("p_max", p_max);
  }
};

struct HomodyneConfig {
  int angles = 20;
  int bins = 20;
  double x_max = 4.0;  // interior binning range

  std::vector<double> angle_values() const {
    std::vector<double> values;
    for (int a = 0; a < angles; ++a)
      values.push_back(a * std::numbers::pi / angles);
    return values;
  }
  // `bins` total bins: bins-2 equal interior bins plus two unbounded tails
  std::vector<double> edge_values() const {
    if (bins < 3) throw InputError("homodyne.bins must be >= 3");
    std::vector<double> edges{-kInf};
    for (int j = 0; j <= bins - 2; ++j)
      edges.push_back(-x_max + j * 2.0 * x_max / (bins - 2));
    edges.push_back(kInf);
    return edges;
  }
  json to_json() const {
    return {{"angles", angles}, {"bins", bins}, {"x_max", x_max}};
  }
  void from_json(const json& j) {
    check_keys(j, "homodyne", kHomodyneKeys);
    angles = j.value("angles", angles);
    bins = j.value("bins", bins);
    x_max = j.value("x_max", x_max);
  }
};

struct SolverConfigJson {
  int max_iters = 20000;
  double eps_rel = 1e-9;
  double eps_feas = 1e-10;
  int stall_window = 10;

  SolverConfig config() const {
    SolverConfig c;
    c.max_iters = max_iters;
    c.eps_rel = eps_rel;
    c.eps_feas = eps_feas;
    c.stall_window = stall_window;
    return c;
  }
  json to_json() const {
    return {{"max_iters", max_iters},
            {"eps_rel", eps_rel},
            {"eps_feas", eps_feas},
            {"stall_window", stall_window}};
  }
  void from_json(const json& j) {
    check_keys(j, "solver", kSolverKeys);
    max_iters = j.value("max_iters", max_iters);
    eps_rel = j.value("eps_rel", eps_rel);
    eps_feas = j.value("eps_feas", eps_feas);
    stall_window = j.value("stall_window", stall_window);
  }
};

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  if (!fs::exists(path)) throw InputError("config file not found: " + path);
  return load_json(path);
}

void ensure_out_dir(const std::string& out) {
  if (out.empty()) throw InputError("--out is required");
  fs::create_directories(out);
}

DensityMatrix load_result_state(const std::string& path) {
  const ReconstructionResult r = result_from_json(load_json(path));
  return r.rho;
}

// ------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string scheme = "heterodyne";
  StateConfig state;
  int dim = 32;
  GridConfig grid;
  HomodyneConfig homodyne;
  double eta = 1.0;
  double nth = 0.0;
  double noise_sigma = 0.0;
  long samples = 0;  // 0 = exact values
  std::uint64_t seed = 1;
  std::string out;

  json resolved() const {
    return {{"command", "simulate"}, {"scheme", scheme},
            {"state", state.to_json()}, {"dim", dim},
            {"grid", grid.to_json()},   {"homodyne", homodyne.to_json()},
            {"eta", eta},               {"nth", nth},
            {"noise_sigma", noise_sigma},
            {"samples", samples},       {"seed", seed},
            {"out", out}};
  }
  void apply_json(const json& j) {
    check_keys(j, "config",
               {"command", "scheme", "state", "dim", "grid", "homodyne",
                "eta", "nth", "noise_sigma", "samples", "seed", "out"});
    scheme = j.value("scheme", scheme);
    if (j.contains("state")) state.from_json(j["state"]);
    dim = j.value("dim", dim);
    if (j.contains("grid")) grid.from_json(j["grid"]);
    if (j.contains("homodyne")) homodyne.from_json(j["homodyne"]);
    eta = j.value("eta", eta);
    nth = j.value("nth", nth);
    noise_sigma = j.value("noise_sigma", noise_sigma);
    samples = j.value("samples", samples);
    seed = j.value("seed", seed);
    out = j.value("out", out);
  }
};

int run_simulate(const SimulateOptions& opt) {
  const Scheme scheme = scheme_from_name(opt.scheme);
  ensure_out_dir(opt.out);
  const fs::path out(opt.out);

  const DensityMatrix rho = make_test_state(opt.state.spec(opt.dim));

  json metadata = {{"scheme", opt.scheme},
                   {"dim", opt.dim},
                   {"state", opt.state.to_json()},
                   {"eta", opt.eta},
                   {"nth", opt.nth},
                   {"noise_sigma", opt.noise_sigma},
                   {"samples", opt.samples},
                   {"seed", opt.seed}};

  if (scheme == Scheme::heterodyne || scheme == Scheme::wigner) {
    const PhaseSpaceGrid grid = opt.grid.grid();
    grid.validate();
    metadata["grid"] = opt.grid.to_json();

    RealVector values;
    if (scheme == Scheme::heterodyne) {
      values = ideal_heterodyne_masses(rho, grid);
      if (opt.nth > 0.0) values = thermal_corrupt(values, grid, opt.nth);
      if (opt.samples > 0) {
        const auto counts = sample_counts(values, opt.samples, opt.seed);
        values.resize(static_cast<long>(counts.size()));
        for (std::size_t k = 0; k < counts.size(); ++k)
          values(static_cast<long>(k)) = static_cast<double>(counts[k]);
      }
    } else {
      values = ideal_wigner_values(rho, grid, opt.noise_sigma, opt.seed);
    }

    write_grid_csv((out / "data.csv").string(), values, grid.nx, grid.np);
    metadata["files"] = {{"data", "data.csv"}};

    PhaseSpaceFunction view{grid, RealMatrix(grid.nx, grid.np),
                            scheme == Scheme::wigner
                                ? PhaseSpaceFunction::Kind::wigner
                                : PhaseSpaceFunction::Kind::husimi_q};
    for (int ix = 0; ix < grid.nx; ++ix)
      for (int ip = 0; ip < grid.np; ++ip)
        view.values(ix, ip) = values(ix * grid.np + ip);
    write_heatmap_ppm((out / "data.ppm").string(), view);
  } else {
    const auto angles = opt.homodyne.angle_values();
    const auto edges = opt.homodyne.edge_values();
    json edges_json = json::array();
    for (double e : edges)
      edges_json.push_back(std::isinf(e) ? json(e > 0 ? "inf" : "-inf")
                                         : json(e));
    metadata["homodyne"] = {{"angles", angles}, {"bin_edges", edges_json}};

    json files = json::array();
    if (opt.samples > 0) {
      const auto hists = simulate_homodyne(rho, angles, edges, opt.eta,
                                           opt.samples, opt.seed);
      for (std::size_t a = 0; a < hists.size(); ++a) {
        char name[32];
        std::snprintf(name, sizeof name, "hist_%03zu.csv", a);
        write_counts_csv((out / name).string(), hists[a]);
        files.push_back(name);
      }
    } else {
      const RealMatrix probs =
          homodyne_exact_probabilities(rho, angles, edges, opt.eta);
      for (int a = 0; a < probs.rows(); ++a) {
        char name[32];
        std::snprintf(name, sizeof name, "hist_%03d.csv", a);
        write_values_csv((out / name).string(), probs.row(a).transpose());
        files.push_back(name);
      }
    }
    metadata["files"] = {{"histograms", files}};
  }

  save_json((out / "metadata.json").string(), metadata);
  save_json((out / "resolved_config.json").string(), opt.resolved());
  std::cout << "wrote dataset to " << opt.out << "\n";
  return 0;
}

// ---------------------------------------------------------- reconstruct

struct ReconstructOptions {
  std::string data;
  std::string scheme;  // empty = take from metadata
  int dim = 0;         // 0 = take from metadata
  GridConfig grid;
  bool grid_set = false;
  HomodyneConfig homodyne;
  double eta = -1.0;  // <0 = take from metadata / default 1
  double nth = -1.0;  // <0 = take from metadata / default 0
  std::optional<StateConfig> reference;
  SolverConfigJson solver;
  std::string save_povm;
  std::string load_povm;
  long samples_override = -1;
  std::string out;

  json resolved() const {
    json j = {{"command", "reconstruct"},
              {"data", data},
              {"scheme", scheme},
              {"dim", dim},
              {"grid", grid.to_json()},
              {"homodyne", homodyne.to_json()},
              {"eta", eta},
              {"nth", nth},
              {"solver", solver.to_json()},
              {"save_povm", save_povm},
              {"load_povm", load_povm},
              {"out", out}};
    if (reference) j["reference"] = reference->to_json();
    return j;
  }
  void apply_json(const json& j) {
    check_keys(j, "config",
               {"command", "data", "scheme", "dim", "grid", "homodyne", "eta",
                "nth", "reference", "solver", "save_povm", "load_povm",
                "out"});
    data = j.value("data", data);
    scheme = j.value("scheme", scheme);
    dim = j.value("dim", dim);
    if (j.contains("grid")) {
      grid.from_json(j["grid"]);
      grid_set = true;
    }
    if (j.contains("homodyne")) homodyne.from_json(j["homodyne"]);
    eta = j.value("eta", eta);
    nth = j.value("nth", nth);
    if (j.contains("reference")) {
      StateConfig r;
      r.from_json(j["reference"]);
      reference = r;
    }
    if (j.contains("solver")) solver.from_json(j["solver"]);
    save_povm = j.value("save_povm", save_povm);
    load_povm = j.value("load_povm", load_povm);
    out = j.value("out", out);
  }
};

std::vector<double> edges_from_metadata(const json& j) {
  std::vector<double> edges;
  for (const auto& e : j) {
    if (e.is_string())
      edges.push_back(e.get<std::string>() == "inf" ? kInf : -kInf);
    else
      edges.push_back(e.get<double>());
  }
  return edges;
}

int run_reconstruct(const ReconstructOptions& opt) {
  if (opt.data.empty()) throw InputError("--data is required");
  ensure_out_dir(opt.out);
  const fs::path out(opt.out);

  // dataset description comes from metadata.json when present, flags otherwise
  json metadata;
  fs::path data_dir;
  std::string data_file;
  if (fs::is_directory(opt.data)) {
    data_dir = opt.data;
    const fs::path meta_path = data_dir / "metadata.json";
    if (!fs::exists(meta_path))
      throw InputError("no metadata.json in " + opt.data);
    metadata = load_json(meta_path.string());
  } else if (fs::exists(opt.data)) {
    data_file = opt.data;
  } else {
    throw InputError("data path not found: " + opt.data);
  }

  std::string scheme_str = opt.scheme;
  if (scheme_str.empty()) {
    if (metadata.contains("scheme"))
      scheme_str = metadata["scheme"].get<std::string>();
    else
      throw InputError("--scheme is required for bare CSV data");
  } else if (metadata.contains("scheme") &&
             metadata["scheme"].get<std::string>() != scheme_str) {
    throw InputError("scheme flag contradicts dataset metadata");
  }
  const Scheme scheme = scheme_from_name(scheme_str);

  const int dim = opt.dim > 0 ? opt.dim : metadata.value("dim", 0);
  if (dim < 1) throw InputError("--dim is required");

  const double eta = opt.eta >= 0.0 ? opt.eta : metadata.value("eta", 1.0);
  const double nth = opt.nth >= 0.0 ? opt.nth : metadata.value("nth", 0.0);

  std::vector<double> angles;
  std::vector<double> edges;
  PhaseSpaceGrid grid{};
  if (scheme == Scheme::homodyne) {
    if (metadata.contains("homodyne")) {
      angles = metadata["homodyne"]["angles"].get<std::vector<double>>();
      edges = edges_from_metadata(metadata["homodyne"]["bin_edges"]);
    } else {
      angles = opt.homodyne.angle_values();
      edges = opt.homodyne.edge_values();
    }
  } else {
    if (metadata.contains("grid")) {
      GridConfig gc;
      gc.from_json(metadata["grid"]);
      grid = gc.grid();
    } else {
      if (!opt.grid_set)
        throw InputError("--grid settings are required for bare CSV data");
      grid = opt.grid.grid();
    }
    grid.validate();
  }

  const auto t_build_start = std::chrono::steady_clock::now();
  PovmSet povms{scheme, FockDim(dim), {}, HeterodyneSettings{}};
  if (!opt.load_povm.empty()) {
    povms = povm_from_json(load_json(opt.load_povm));
    if (povms.dim.n != dim || povms.scheme != scheme)
      throw InputError("cached POVM set does not match scheme/dim");
  } else {
    switch (scheme) {
      case Scheme::homodyne:
        povms =
            build_povm_set(HomodyneSettings{angles, edges, eta}, FockDim(dim));
        break;
      case Scheme::heterodyne:
        povms = build_povm_set(HeterodyneSettings{grid, nth}, FockDim(dim));
        break;
      case Scheme::wigner:
        povms = build_povm_set(WignerSettings{grid}, FockDim(dim));
        break;
    }
  }
  if (!opt.save_povm.empty()) save_json(opt.save_povm, povm_to_json(povms));

  const DesignMatrix a = build_design_matrix(povms);

  MeasurementVector b;
  const long samples = opt.samples_override >= 0
                           ? opt.samples_override
                           : metadata.value("samples", 0L);
  if (scheme == Scheme::homodyne) {
    if (data_dir.empty())
      throw InputError("homodyne reconstruction expects a dataset directory");
    const auto files = metadata["files"]["histograms"];
    if (files.size() != angles.size())
      throw InputError("histogram count does not match angle count");
    if (samples > 0) {
      std::vector<std::vector<long>> hists;
      for (const auto& f : files)
        hists.push_back(
            read_counts_csv((data_dir / f.get<std::string>()).string()));
      b = build_measurement_vector(hists, povms);
    } else {
      RealVector values(povms.outcomes());
      long offset = 0;
      for (const auto& f : files) {
        const RealVector v =
            read_values_csv((data_dir / f.get<std::string>()).string());
        if (offset + v.size() > values.size())
          throw InputError("histogram shape mismatch");
        values.segment(offset, v.size()) = v;
        offset += v.size();
      }
      if (offset != values.size()) throw InputError("histogram shape mismatch");
      b = build_measurement_vector(values, Normalization::probabilities,
                                   povms);
    }
  } else {
    const std::string path =
        data_dir.empty()
            ? data_file
            : (data_dir / metadata["files"]["data"].get<std::string>())
                  .string();
    int rows = 0, cols = 0;
    const RealVector values = read_grid_csv(path, &rows, &cols);
    if (rows != grid.nx || cols != grid.np) {
      std::ostringstream msg;
      msg << "data grid is " << rows << "x" << cols << " but the POVM grid is "
          << grid.nx << "x" << grid.np;
      throw InputError(msg.str());
    }
    if (scheme == Scheme::wigner) {
      b = build_measurement_vector(values, Normalization::wigner_values, povms);
    } else if (samples > 0) {
      std::vector<long> counts(static_cast<std::size_t>(values.size()));
      for (long k = 0; k < values.size(); ++k)
        counts[static_cast<std::size_t>(k)] = std::lround(values(k));
      b = build_measurement_vector(counts, povms, samples);
    } else {
      // ideal grid values are discretized Q-densities; coarse grids can
      // Riemann-overshoot a total of 1, so they are not frequency data
      b = build_measurement_vector(values, Normalization::densities, povms);
    }
  }
  const double t_build = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - t_build_start)
                             .count();

  ReconstructionResult result = reconstruct(a, b, opt.solver.config());
  result.t_build = t_build;

  save_json((out / "result.json").string(), result_to_json(result));
  write_values_csv((out / "populations.csv").string(),
                   photon_populations(result.rho));

  PhaseSpaceGrid view_grid = grid;
  if (scheme == Scheme::homodyne) {
    double span = 4.0;
    for (double e : edges)
      if (std::isfinite(e)) span = std::max(span, std::abs(e));
    view_grid = PhaseSpaceGrid{span, span, 61, 61};
  }
  const PhaseSpaceFunction w = wigner_function(result.rho, view_grid);
  write_phase_space_csv((out / "wigner.csv").string(), w);
  write_heatmap_ppm((out / "wigner.ppm").string(), w);

  json summary = {{"objective", result.objective},
                  {"residual_norm", result.residual_norm},
                  {"iterations", result.iterations},
                  {"converged", result.converged},
                  {"t_build", result.t_build},
                  {"t_solve", result.t_solve}};

  if (opt.reference || metadata.contains("state")) {
    StateConfig ref;
    if (opt.reference)
      ref = *opt.reference;
    else
      ref.from_json(metadata["state"]);
    const DensityMatrix target = make_test_state(ref.spec(dim));
    const double f = fidelity(result.rho, target);
    summary["fidelity"] = f;
    summary["reference"] = ref.to_json();
    std::cout << "fidelity = " << f << "\n";
  }
  save_json((out / "summary.json").string(), summary);
  save_json((out / "resolved_config.json").string(), opt.resolved());

  std::cout << "objective = " << result.objective
            << ", iterations = " << result.iterations
            << ", converged = " << (result.converged ? "yes" : "no") << "\n";

  if (!result.converged) {
    const CertificateReport cert = certify_optimality(result, a, b, 500);
    if (!cert.passed) {
      std::cerr << "non-convergence: optimality certificate failed at trial "
                << cert.first_violation << "\n";
      return 1;
    }
  }
  return 0;
}

// ------------------------------------------------------------ benchmark

struct BenchmarkEntry {
  std::string type;
  double parameter = 0.0;
  int grid_n = 20;
  double alpha_max = 4.0;
  int dim = 32;
  StateConfig state;
  long samples = 0;
  std::uint64_t seed = 1;
};

struct BenchmarkRow {
  BenchmarkEntry entry;
  double fidelity = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double t_build = 0.0;
  double t_solve = 0.0;
  std::string status = "ok";
};

BenchmarkRow run_benchmark_entry(const BenchmarkEntry& e,
                                 const SolverConfigJson& solver) {
  BenchmarkRow row;
  row.entry = e;
  try {
    const DensityMatrix truth = make_test_state(e.state.spec(e.dim));
    const PhaseSpaceGrid grid{e.alpha_max, e.alpha_max, e.grid_n, e.grid_n};

    const auto t0 = std::chrono::steady_clock::now();
    const PovmSet povms =
        build_povm_set(HeterodyneSettings{grid, 0.0}, FockDim(e.dim));
    const DesignMatrix a = build_design_matrix(povms);
    row.t_build =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();

    // data comes from a roomy representation so the sweep probes the
    // reconstruction parameters, not the data generator
    const int data_dim = std::max(e.dim, 32);
    const DensityMatrix data_state = make_test_state(e.state.spec(data_dim));
    const RealVector masses = ideal_heterodyne_masses(data_state, grid);
    MeasurementVector b;
    if (e.samples > 0) {
      const auto counts = sample_counts(masses, e.samples, e.seed);
      b = build_measurement_vector(counts, povms, e.samples);
    } else {
      b = build_measurement_vector(masses, Normalization::densities, povms);
    }

    const ReconstructionResult result = reconstruct(a, b, solver.config());
    row.fidelity = fidelity(result.rho, truth);
    row.objective = result.objective;
    row.iterations = result.iterations;
    row.converged = result.converged;
    row.t_solve = result.t_solve;
  } catch (const std::exception& err) {
    row.status = std::string("failed: ") + err.what();
  }
  return row;
}

int run_benchmark(const std::string& sweep_path, int jobs_override,
                  const std::string& out_override) {
  json sweep = load_json(sweep_path);
  check_keys(sweep, "sweep",
             {"command", "type", "values", "grids", "grid", "alpha_max",
              "dims", "dim", "state", "samples_values", "seeds", "seed",
              "solver", "jobs", "out"});

  const std::string type = sweep.value("type", "");
  StateConfig state;
  if (sweep.contains("state")) state.from_json(sweep["state"]);
  SolverConfigJson solver;
  if (sweep.contains("solver")) solver.from_json(sweep["solver"]);
  const std::uint64_t seed = sweep.value("seed", std::uint64_t{1});

  std::vector<BenchmarkEntry> entries;
  if (type == "alpha_max") {
    const auto values = sweep.at("values").get<std::vector<double>>();
    const auto grids = sweep.value("grids", std::vector<int>{15, 25});
    const int dim = sweep.value("dim", 32);
    for (double v : values)
      for (int g : grids)
        entries.push_back(BenchmarkEntry{type, v, g, v, dim, state, 0, seed});
  } else if (type == "dim") {
    const auto values = sweep.at("values").get<std::vector<int>>();
    const int grid_n = sweep.value("grid", 20);
    const double alpha_max = sweep.value("alpha_max", 4.0);
    for (int n : values)
      entries.push_back(BenchmarkEntry{type, static_cast<double>(n), grid_n,
                                       alpha_max, n, state, 0, seed});
  } else if (type == "samples") {
    const auto values = sweep.at("samples_values").get<std::vector<long>>();
    const int seeds = sweep.value("seeds", 5);
    const int grid_n = sweep.value("grid", 20);
    const double alpha_max = sweep.value("alpha_max", 4.0);
    const int dim = sweep.value("dim", 16);
    for (long s : values)
      for (int r = 0; r < seeds; ++r)
        entries.push_back(BenchmarkEntry{type, static_cast<double>(s), grid_n,
                                         alpha_max, dim, state, s,
                                         seed + static_cast<std::uint64_t>(r)});
  } else if (type == "timing") {
    const auto dims = sweep.value("dims", std::vector<int>{20, 30, 40, 50, 60});
    const int grid_n = sweep.value("grid", 20);
    const double alpha_max = sweep.value("alpha_max", 4.0);
    for (int n : dims)
      entries.push_back(BenchmarkEntry{type, static_cast<double>(n), grid_n,
                                       alpha_max, n, state, 0, seed});
  } else {
    throw InputError("unknown sweep type: " + type);
  }

  const int jobs = jobs_override > 0 ? jobs_override : sweep.value("jobs", 1);
  const std::string out_path =
      !out_override.empty() ? out_override : sweep.value("out", "sweep.csv");

  std::vector<BenchmarkRow> rows(entries.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= entries.size()) break;
      rows[k] = run_benchmark_entry(entries[k], solver);
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::ofstream csv(out_path);
  if (!csv) throw InputError("cannot open " + out_path);
  csv << "type,parameter,grid,alpha_max,dim,state,samples,seed,fidelity,"
         "objective,iterations,converged,t_build,t_solve,status\n";
  csv.precision(12);
  for (const auto& r : rows) {
    csv << r.entry.type << ',' << r.entry.parameter << ',' << r.entry.grid_n
        << ',' << r.entry.alpha_max << ',' << r.entry.dim << ','
        << r.entry.state.name << ',' << r.entry.samples << ',' << r.entry.seed
        << ',' << r.fidelity << ',' << r.objective << ',' << r.iterations
        << ',' << (r.converged ? 1 : 0) << ',' << r.t_build << ','
        << r.t_solve << ',' << r.status << '\n';
  }
  csv.close();

  json resolved = sweep;
  resolved["command"] = "benchmark";
  resolved["jobs"] = jobs;
  resolved["out"] = out_path;
  save_json(out_path + ".resolved_config.json", resolved);

  int failures = 0;
  for (const auto& r : rows)
    if (r.status != "ok") ++failures;
  std::cout << "wrote " << rows.size() << " rows to " << out_path;
  if (failures) std::cout << " (" << failures << " failed entries)";
  std::cout << "\n";
  return 0;
}

// ------------------------------------------------------- fidelity/inspect

DensityMatrix resolve_state_argument(const std::string& arg,
                                     const StateConfig& params, int dim) {
  if (fs::exists(arg)) return load_result_state(arg);
  StateConfig s = params;
  s.name = arg;
  return make_test_state(s.spec(dim));
}

int run_fidelity(const std::string& a, const std::string& b,
                 const StateConfig& params, int dim, const std::string& out) {
  int resolved_dim = dim;
  if (resolved_dim <= 0) {
    if (fs::exists(a))
      resolved_dim = load_result_state(a).dim();
    else if (fs::exists(b))
      resolved_dim = load_result_state(b).dim();
    else
      resolved_dim = 32;
  }
  const DensityMatrix rho = resolve_state_argument(a, params, resolved_dim);
  const DensityMatrix sigma = resolve_state_argument(b, params, resolved_dim);
  if (rho.dim() != sigma.dim())
    throw InputError("states have different dimensions; pass --dim");
  const double f = fidelity(rho, sigma);
  std::cout << f << "\n";
  if (!out.empty()) {
    ensure_out_dir(out);
    save_json((fs::path(out) / "resolved_config.json").string(),
              {{"command", "fidelity"},
               {"a", a},
               {"b", b},
               {"dim", resolved_dim},
               {"state", params.to_json()},
               {"fidelity", f}});
  }
  return 0;
}

int run_inspect(const std::string& path) {
  if (!fs::exists(path)) throw InputError("path not found: " + path);
  fs::path p(path);
  if (fs::is_directory(p)) {
    if (fs::exists(p / "metadata.json"))
      p = p / "metadata.json";
    else if (fs::exists(p / "result.json"))
      p = p / "result.json";
    else
      throw InputError("nothing to inspect in " + path);
  }
  if (p.extension() == ".csv") {
    int rows = 0, cols = 0;
    const RealVector v = read_grid_csv(p.string(), &rows, &cols);
    std::cout << "csv grid " << rows << "x" << cols << ", sum = " << v.sum()
              << ", min = " << v.minCoeff() << ", max = " << v.maxCoeff()
              << "\n";
    return 0;
  }
  const json j = load_json(p.string());
  if (j.contains("rho_re")) {
    const ReconstructionResult r = result_from_json(j);
    std::cout << "reconstruction result: dim " << r.rho.dim() << ", objective "
              << r.objective << ", iterations " << r.iterations
              << ", converged " << (r.converged ? "yes" : "no")
              << ", t_build " << r.t_build << " s, t_solve " << r.t_solve
              << " s\n";
    const RealVector pops = photon_populations(r.rho);
    std::cout << "populations:";
    for (int k = 0; k < std::min<long>(8, pops.size()); ++k)
      std::cout << ' ' << pops(k);
    if (pops.size() > 8) std::cout << " ...";
    std::cout << "\n";
  } else if (j.contains("operators")) {
    const PovmSet set = povm_from_json(j);
    std::cout << "povm cache: scheme " << scheme_name(set.scheme) << ", dim "
              << set.dim.n << ", " << set.outcomes() << " operators\n";
  } else if (j.contains("scheme")) {
    std::cout << "dataset: scheme " << j["scheme"].get<std::string>()
              << ", dim " << j.value("dim", 0) << ", samples "
              << j.value("samples", 0L) << ", seed "
              << j.value("seed", std::uint64_t{0}) << "\n";
    if (j.contains("state")) std::cout << "state: " << j["state"].dump() << "\n";
  } else {
    std::cout << j.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"continuous-variable quantum state tomography"};
  app.require_subcommand(1);

  // ---- simulate
  SimulateOptions sim;
  std::string sim_config;
  auto* simulate_cmd =
      app.add_subcommand("simulate", "generate measurement datasets");
  simulate_cmd->add_option("--config", sim_config, "JSON config file");
  simulate_cmd->add_option("--scheme", sim.scheme,
                           "homodyne | heterodyne | wigner");
  simulate_cmd->add_option("--state", sim.state.name,
                           "vac02 | cat | fock04 | squeezed | fock1");
  simulate_cmd->add_option("--beta", sim.state.beta, "cat amplitude");
  simulate_cmd->add_option("--squeeze-r", sim.state.squeeze_r,
                           "squeezing parameter");
  simulate_cmd->add_option("--dim", sim.dim, "Fock space dimension");
  int sim_grid_n = 0;
  double sim_alpha_max = 0.0;
  simulate_cmd->add_option("--grid", sim_grid_n, "square grid size");
  simulate_cmd->add_option("--alpha-max", sim_alpha_max,
                           "phase-space limit (x and p)");
  simulate_cmd->add_option("--nx", sim.grid.nx, "grid cells along x");
  simulate_cmd->add_option("--np", sim.grid.np, "grid cells along p");
  simulate_cmd->add_option("--x-max", sim.grid.x_max, "x limit");
  simulate_cmd->add_option("--p-max", sim.grid.p_max, "p limit");
  simulate_cmd->add_option("--angles", sim.homodyne.angles,
                           "number of homodyne angles");
  simulate_cmd->add_option("--bins", sim.homodyne.bins,
                           "number of homodyne bins (incl. two tail bins)");
  simulate_cmd->add_option("--bin-xmax", sim.homodyne.x_max,
                           "interior homodyne binning range");
  simulate_cmd->add_option("--eta", sim.eta, "homodyne detection efficiency");
  simulate_cmd->add_option("--nth", sim.nth, "thermal photons in the data");
  simulate_cmd->add_option("--noise-sigma", sim.noise_sigma,
                           "gaussian noise per Wigner point");
  simulate_cmd->add_option("--samples", sim.samples,
                           "samples (per angle for homodyne); 0 = exact");
  simulate_cmd->add_option("--seed", sim.seed, "PRNG seed");
  simulate_cmd->add_option("--out", sim.out, "output directory");

  // ---- reconstruct
  ReconstructOptions rec;
  std::string rec_config;
  auto* reconstruct_cmd =
      app.add_subcommand("reconstruct", "reconstruct a state from data");
  reconstruct_cmd->add_option("--config", rec_config, "JSON config file");
  reconstruct_cmd->add_option("--data", rec.data,
                              "dataset directory or bare CSV grid");
  reconstruct_cmd->add_option("--scheme", rec.scheme,
                              "homodyne | heterodyne | wigner");
  reconstruct_cmd->add_option("--dim", rec.dim, "reconstruction dimension");
  int rec_grid_n = 0;
  double rec_alpha_max = 0.0;
  reconstruct_cmd->add_option("--grid", rec_grid_n, "square grid size");
  reconstruct_cmd->add_option("--alpha-max", rec_alpha_max,
                              "phase-space limit");
  reconstruct_cmd->add_option("--nx", rec.grid.nx, "grid cells along x");
  reconstruct_cmd->add_option("--np", rec.grid.np, "grid cells along p");
  reconstruct_cmd->add_option("--x-max", rec.grid.x_max, "x limit");
  reconstruct_cmd->add_option("--p-max", rec.grid.p_max, "p limit");
  reconstruct_cmd->add_option("--angles", rec.homodyne.angles,
                              "homodyne angles (bare data only)");
  reconstruct_cmd->add_option("--bins", rec.homodyne.bins,
                              "homodyne bins (bare data only)");
  reconstruct_cmd->add_option("--bin-xmax", rec.homodyne.x_max,
                              "homodyne binning range (bare data only)");
  reconstruct_cmd->add_option("--eta", rec.eta,
                              "detection efficiency compensated in the POVMs");
  reconstruct_cmd->add_option("--nth", rec.nth,
                              "thermal photons compensated in the POVMs");
  std::string rec_reference;
  double rec_ref_beta = 2.0, rec_ref_r = 0.5;
  reconstruct_cmd->add_option("--reference", rec_reference,
                              "reference state name for fidelity");
  reconstruct_cmd->add_option("--reference-beta", rec_ref_beta,
                              "reference cat amplitude");
  reconstruct_cmd->add_option("--reference-squeeze-r", rec_ref_r,
                              "reference squeezing");
  reconstruct_cmd->add_option("--max-iters", rec.solver.max_iters,
                              "solver iteration cap");
  reconstruct_cmd->add_option("--eps-rel", rec.solver.eps_rel,
                              "relative objective stall tolerance");
  reconstruct_cmd->add_option("--eps-feas", rec.solver.eps_feas,
                              "feasibility tolerance");
  reconstruct_cmd->add_option("--samples", rec.samples_override,
                              "override the dataset sample count");
  reconstruct_cmd->add_option("--save-povm", rec.save_povm,
                              "cache the POVM set to this JSON file");
  reconstruct_cmd->add_option("--load-povm", rec.load_povm,
                              "load a cached POVM set");
  reconstruct_cmd->add_option("--out", rec.out, "output directory");

  // ---- benchmark
  std::string bench_sweep, bench_out;
  int bench_jobs = 0;
  auto* benchmark_cmd = app.add_subcommand("benchmark", "run a parameter sweep");
  benchmark_cmd->add_option("--sweep", bench_sweep, "sweep spec JSON file")
      ->required();
  benchmark_cmd->add_option("--jobs", bench_jobs, "worker pool size");
  benchmark_cmd->add_option("--out", bench_out, "output CSV path");

  // ---- fidelity
  std::string fid_a, fid_b, fid_out;
  StateConfig fid_params;
  int fid_dim = 0;
  auto* fidelity_cmd = app.add_subcommand(
      "fidelity", "fidelity between result files and/or named states");
  fidelity_cmd->add_option("--a", fid_a, "result.json path or state name")
      ->required();
  fidelity_cmd->add_option("--b", fid_b, "result.json path or state name")
      ->required();
  fidelity_cmd->add_option("--dim", fid_dim, "dimension for named states");
  fidelity_cmd->add_option("--beta", fid_params.beta, "cat amplitude");
  fidelity_cmd->add_option("--squeeze-r", fid_params.squeeze_r, "squeezing");
  fidelity_cmd->add_option("--out", fid_out, "optional output directory");

  // ---- inspect
  std::string inspect_path;
  auto* inspect_cmd =
      app.add_subcommand("inspect", "summarize a dataset, result, or cache");
  inspect_cmd->add_option("path", inspect_path, "file or directory")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate_cmd->parsed()) {
      SimulateOptions merged;
      merged.apply_json(load_config_file(sim_config));
      if (simulate_cmd->count("--scheme")) merged.scheme = sim.scheme;
      if (simulate_cmd->count("--state")) merged.state.name = sim.state.name;
      if (simulate_cmd->count("--beta")) merged.state.beta = sim.state.beta;
      if (simulate_cmd->count("--squeeze-r"))
        merged.state.squeeze_r = sim.state.squeeze_r;
      if (simulate_cmd->count("--dim")) merged.dim = sim.dim;
      if (simulate_cmd->count("--grid")) {
        merged.grid.nx = sim_grid_n;
        merged.grid.np = sim_grid_n;
      }
      if (simulate_cmd->count("--alpha-max")) {
        merged.grid.x_max = sim_alpha_max;
        merged.grid.p_max = sim_alpha_max;
      }
      if (simulate_cmd->count("--nx")) merged.grid.nx = sim.grid.nx;
      if (simulate_cmd->count("--np")) merged.grid.np = sim.grid.np;
      if (simulate_cmd->count("--x-max")) merged.grid.x_max = sim.grid.x_max;
      if (simulate_cmd->count("--p-max")) merged.grid.p_max = sim.grid.p_max;
      if (simulate_cmd->count("--angles"))
        merged.homodyne.angles = sim.homodyne.angles;
      if (simulate_cmd->count("--bins"))
        merged.homodyne.bins = sim.homodyne.bins;
      if (simulate_cmd->count("--bin-xmax"))
        merged.homodyne.x_max = sim.homodyne.x_max;
      if (simulate_cmd->count("--eta")) merged.eta = sim.eta;
      if (simulate_cmd->count("--nth")) merged.nth = sim.nth;
      if (simulate_cmd->count("--noise-sigma"))
        merged.noise_sigma = sim.noise_sigma;
      if (simulate_cmd->count("--samples")) merged.samples = sim.samples;
      if (simulate_cmd->count("--seed")) merged.seed = sim.seed;
      if (simulate_cmd->count("--out")) merged.out = sim.out;
      return run_simulate(merged);
    }
    if (reconstruct_cmd->parsed()) {
      ReconstructOptions merged;
      merged.apply_json(load_config_file(rec_config));
      if (reconstruct_cmd->count("--data")) merged.data = rec.data;
      if (reconstruct_cmd->count("--scheme")) merged.scheme = rec.scheme;
      if (reconstruct_cmd->count("--dim")) merged.dim = rec.dim;
      if (reconstruct_cmd->count("--grid")) {
        merged.grid.nx = rec_grid_n;
        merged.grid.np = rec_grid_n;
        merged.grid_set = true;
      }
      if (reconstruct_cmd->count("--alpha-max")) {
        merged.grid.x_max = rec_alpha_max;
        merged.grid.p_max = rec_alpha_max;
        merged.grid_set = true;
      }
      if (reconstruct_cmd->count("--nx")) {
        merged.grid.nx = rec.grid.nx;
        merged.grid_set = true;
      }
      if (reconstruct_cmd->count("--np")) {
        merged.grid.np = rec.grid.np;
        merged.grid_set = true;
      }
      if (reconstruct_cmd->count("--x-max")) {
        merged.grid.x_max = rec.grid.x_max;
        merged.grid_set = true;
      }
      if (reconstruct_cmd->count("--p-max")) {
        merged.grid.p_max = rec.grid.p_max;
        merged.grid_set = true;
      }
      if (reconstruct_cmd->count("--angles"))
        merged.homodyne.angles = rec.homodyne.angles;
      if (reconstruct_cmd->count("--bins"))
        merged.homodyne.bins = rec.homodyne.bins;
      if (reconstruct_cmd->count("--bin-xmax"))
        merged.homodyne.x_max = rec.homodyne.x_max;
      if (reconstruct_cmd->count("--eta")) merged.eta = rec.eta;
      if (reconstruct_cmd->count("--nth")) merged.nth = rec.nth;
      if (reconstruct_cmd->count("--reference")) {
        StateConfig ref;
        ref.name = rec_reference;
        ref.beta = rec_ref_beta;
        ref.squeeze_r = rec_ref_r;
        merged.reference = ref;
      }
      if (reconstruct_cmd->count("--max-iters"))
        merged.solver.max_iters = rec.solver.max_iters;
      if (reconstruct_cmd->count("--eps-rel"))
        merged.solver.eps_rel = rec.solver.eps_rel;
      if (reconstruct_cmd->count("--eps-feas"))
        merged.solver.eps_feas = rec.solver.eps_feas;
      if (reconstruct_cmd->count("--samples"))
        merged.samples_override = rec.samples_override;
      if (reconstruct_cmd->count("--save-povm"))
        merged.save_povm = rec.save_povm;
      if (reconstruct_cmd->count("--load-povm"))
        merged.load_povm = rec.load_povm;
      if (reconstruct_cmd->count("--out")) merged.out = rec.out;
      return run_reconstruct(merged);
    }
    if (benchmark_cmd->parsed())
      return run_benchmark(bench_sweep, bench_jobs, bench_out);
    if (fidelity_cmd->parsed())
      return run_fidelity(fid_a, fid_b, fid_params, fid_dim, fid_out);
    if (inspect_cmd->parsed()) return run_inspect(inspect_path);
  } catch (const InputError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "failure: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
