#include "cvtomo/serialize.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace cvtomo {

namespace {

constexpr char kBase64Chars[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int base64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

// bin edges may be +-inf, which JSON numbers cannot carry
nlohmann::json edge_to_json(double e) {
  if (std::isinf(e)) return e > 0 ? "inf" : "-inf";
  return e;
}

double edge_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw std::invalid_argument("bad bin edge: " + s);
  }
  return j.get<double>();
}

nlohmann::json grid_to_json(const PhaseSpaceGrid& g) {
  return {{"x_max", g.x_max}, {"p_max", g.p_max}, {"nx", g.nx}, {"np", g.np}};
}

PhaseSpaceGrid grid_from_json(const nlohmann::json& j) {
  return PhaseSpaceGrid{j.at("x_max").get<double>(),
                        j.at("p_max").get<double>(), j.at("nx").get<int>(),
                        j.at("np").get<int>()};
}

}  // namespace

std::string base64_encode(const unsigned char* data, std::size_t len) {
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  for (std::size_t i = 0; i < len; i += 3) {
    unsigned int chunk = data[i] << 16;
    if (i + 1 < len) chunk |= data[i + 1] << 8;
    if (i + 2 < len) chunk |= data[i + 2];
    out.push_back(kBase64Chars[(chunk >> 18) & 0x3f]);
    out.push_back(kBase64Chars[(chunk >> 12) & 0x3f]);
    out.push_back(i + 1 < len ? kBase64Chars[(chunk >> 6) & 0x3f] : '=');
    out.push_back(i + 2 < len ? kBase64Chars[chunk & 0x3f] : '=');
  }
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  unsigned int chunk = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    const int v = base64_value(c);
    if (v < 0) throw std::invalid_argument("base64: invalid character");
    chunk = (chunk << 6) | static_cast<unsigned>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((chunk >> bits) & 0xff));
    }
  }
  return out;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  // row-major doubles, re/im interleaved, little-endian
  std::vector<double> raw;
  raw.reserve(2 * m.size());
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) {
      raw.push_back(m(i, j).real());
      raw.push_back(m(i, j).imag());
    }
  const auto* bytes = reinterpret_cast<const unsigned char*>(raw.data());
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"data", base64_encode(bytes, raw.size() * sizeof(double))}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const long rows = j.at("rows").get<long>();
  const long cols = j.at("cols").get<long>();
  const auto bytes = base64_decode(j.at("data").get<std::string>());
  if (bytes.size() != static_cast<std::size_t>(2 * rows * cols) * sizeof(double))
    throw std::invalid_argument("matrix_from_json: size mismatch");
  std::vector<double> raw(2 * rows * cols);
  std::memcpy(raw.data(), bytes.data(), bytes.size());
  Matrix m(rows, cols);
  std::size_t idx = 0;
  for (long i = 0; i < rows; ++i)
    for (long c = 0; c < cols; ++c) {
      m(i, c) = Complex(raw[idx], raw[idx + 1]);
      idx += 2;
    }
  return m;
}

nlohmann::json settings_to_json(const PovmSettings& settings) {
  return std::visit(
      [](const auto& s) -> nlohmann::json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HomodyneSettings>) {
          nlohmann::json edges = nlohmann::json::array();
          for (double e : s.bin_edges) edges.push_back(edge_to_json(e));
          return {{"angles", s.angles},
                  {"bin_edges", edges},
                  {"efficiency", s.efficiency}};
        } else if constexpr (std::is_same_v<T, HeterodyneSettings>) {
          return {{"grid", grid_to_json(s.grid)}, {"n_th", s.n_th}};
        } else {
          return {{"grid", grid_to_json(s.grid)}};
        }
      },
      settings);
}

PovmSettings settings_from_json(const nlohmann::json& j, Scheme scheme) {
  switch (scheme) {
    case Scheme::homodyne: {
      HomodyneSettings s;
      s.angles = j.at("angles").get<std::vector<double>>();
      for (const auto& e : j.at("bin_edges")) s.bin_edges.push_back(edge_from_json(e));
      s.efficiency = j.at("efficiency").get<double>();
      return s;
    }
    case Scheme::heterodyne:
      return HeterodyneSettings{grid_from_json(j.at("grid")),
                                j.at("n_th").get<double>()};
    case Scheme::wigner:
      return WignerSettings{grid_from_json(j.at("grid"))};
  }
  throw std::logic_error("settings_from_json: bad scheme");
}

nlohmann::json povm_to_json(const PovmSet& povms) {
  nlohmann::json ops = nlohmann::json::array();
  for (const auto& op : povms.operators) ops.push_back(matrix_to_json(op));
  return {{"scheme", scheme_name(povms.scheme)},
          {"dim", povms.dim.n},
          {"settings", settings_to_json(povms.settings)},
          {"operators", ops}};
}

PovmSet povm_from_json(const nlohmann::json& j) {
  const Scheme scheme = scheme_from_name(j.at("scheme").get<std::string>());
  PovmSet set{scheme, FockDim(j.at("dim").get<int>()), {},
              settings_from_json(j.at("settings"), scheme)};
  for (const auto& op : j.at("operators"))
    set.operators.push_back(matrix_from_json(op));
  return set;
}

nlohmann::json design_matrix_to_json(const DesignMatrix& a) {
  return {{"scheme", scheme_name(a.scheme)},
          {"dim", a.dim.n},
          {"settings", settings_to_json(a.settings)},
          {"entries", matrix_to_json(a.entries)}};
}

DesignMatrix design_matrix_from_json(const nlohmann::json& j) {
  const Scheme scheme = scheme_from_name(j.at("scheme").get<std::string>());
  return DesignMatrix{matrix_from_json(j.at("entries")),
                      FockDim(j.at("dim").get<int>()), scheme,
                      settings_from_json(j.at("settings"), scheme)};
}

nlohmann::json result_to_json(const ReconstructionResult& r) {
  const Matrix& rho = r.rho.matrix();
  std::vector<double> re, im;
  re.reserve(rho.size());
  im.reserve(rho.size());
  for (long i = 0; i < rho.rows(); ++i)
    for (long j = 0; j < rho.cols(); ++j) {
      re.push_back(rho(i, j).real());
      im.push_back(rho(i, j).imag());
    }
  return {{"dim", r.rho.dim()},     {"rho_re", re},
          {"rho_im", im},           {"objective", r.objective},
          {"residual_norm", r.residual_norm},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"t_build", r.t_build},   {"t_solve", r.t_solve}};
}

ReconstructionResult result_from_json(const nlohmann::json& j) {
  const int n = j.at("dim").get<int>();
  const auto re = j.at("rho_re").get<std::vector<double>>();
  const auto im = j.at("rho_im").get<std::vector<double>>();
  if (re.size() != static_cast<std::size_t>(n) * n || im.size() != re.size())
    throw std::invalid_argument("result_from_json: entry count mismatch");
  Matrix rho(n, n);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < n; ++c)
      rho(i, c) = Complex(re[i * n + c], im[i * n + c]);
  ReconstructionResult r;
  r.rho = DensityMatrix(std::move(rho));
  r.objective = j.at("objective").get<double>();
  r.residual_norm = j.at("residual_norm").get<double>();
  r.iterations = j.at("iterations").get<int>();
  r.converged = j.at("converged").get<bool>();
  r.t_build = j.at("t_build").get<double>();
  r.t_solve = j.at("t_solve").get<double>();
  return r;
}

void save_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(2) << '\n';
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

void write_values_csv(const std::string& path, const RealVector& values) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.precision(17);
  for (int i = 0; i < values.size(); ++i) out << values(i) << '\n';
}

RealVector read_values_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    values.push_back(std::stod(line));
  }
  return Eigen::Map<const RealVector>(values.data(), values.size());
}

void write_grid_csv(const std::string& path, const RealVector& values,
                    int rows, int cols) {
  if (values.size() != static_cast<long>(rows) * cols)
    throw std::invalid_argument("write_grid_csv: shape mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.precision(17);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c) out << ',';
      out << values(r * cols + c);
    }
    out << '\n';
  }
}

RealVector read_grid_csv(const std::string& path, int* rows_out,
                         int* cols_out) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> values;
  std::string line;
  int rows = 0;
  int cols = -1;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    int this_cols = 0;
    while (std::getline(ss, cell, ',')) {
      values.push_back(std::stod(cell));
      ++this_cols;
    }
    if (cols < 0) cols = this_cols;
    if (this_cols != cols)
      throw std::invalid_argument("read_grid_csv: ragged rows");
    ++rows;
  }
  if (rows_out) *rows_out = rows;
  if (cols_out) *cols_out = cols;
  return Eigen::Map<const RealVector>(values.data(), values.size());
}

void write_counts_csv(const std::string& path,
                      const std::vector<long>& counts) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (long c : counts) out << c << '\n';
}

std::vector<long> read_counts_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<long> counts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    counts.push_back(std::stol(line));
  }
  return counts;
}

}  // namespace cvtomo
