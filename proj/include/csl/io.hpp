#pragma once

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "csl/exclusion.hpp"
#include "csl/master.hpp"
#include "csl/stats.hpp"
#include "csl/trace_dynamics.hpp"

namespace csl::io {

using Json = nlohmann::ordered_json;

/// Fixed 17-significant-digit rendering, exact on round trip.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline Json params_json(const CslParams& p) {
  return Json{{"gamma", p.gamma}, {"lambda", p.lambda()}, {"dim", p.dim}, {"r_C", p.r_C},
              {"m", p.m},         {"m0", p.m0},           {"hbar", p.hbar}};
}

inline Json grid_json(const Grid1D& g) {
  return Json{{"n_sites", g.size()}, {"dx", g.dx()}, {"x_min", g.x_min()}};
}

/// CSV table whose leading lines are "# key: <json value>" metadata.
class CsvWriter {
 public:
  CsvWriter(Json meta, std::vector<std::string> header) : meta_(std::move(meta)), header_(std::move(header)) {}

  void row(const std::vector<double>& values) {
    require(values.size() == header_.size(), ErrorCode::InvalidArgument, "csv row width differs from header");
    std::string line;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) line += ',';
      line += fmt(values[i]);
    }
    rows_.push_back(std::move(line));
  }

  /// Row of preformatted cells, for mixed text and numbers.
  void raw_row(const std::vector<std::string>& cells) {
    require(cells.size() == header_.size(), ErrorCode::InvalidArgument, "csv row width differs from header");
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) line += ',';
      line += cells[i];
    }
    rows_.push_back(std::move(line));
  }

  std::string str() const {
    std::ostringstream os;
    for (const auto& [k, v] : meta_.items()) os << "# " << k << ": " << v.dump() << '\n';
    for (std::size_t i = 0; i < header_.size(); ++i) os << (i ? "," : "") << header_[i];
    os << '\n';
    for (const auto& r : rows_) os << r << '\n';
    return os.str();
  }

 private:
  Json meta_;
  std::vector<std::string> header_;
  std::vector<std::string> rows_;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(f), ErrorCode::Io, "cannot open '" + path + "' for writing");
  f << text;
  f.close();
  require(!f.fail(), ErrorCode::Io, "write to '" + path + "' failed");
}

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

inline std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

struct CsvTable {
  std::vector<std::string> meta_lines;  // without the leading "# "
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream is(text);
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      t.meta_lines.push_back(line.substr(2));
    } else if (!have_header) {
      t.header = split_csv_line(line);
      have_header = true;
    } else {
      t.rows.push_back(split_csv_line(line));
    }
  }
  return t;
}

// ---------------------------------------------------------------- trajectories

inline std::string trajectory_csv(const TrajectoryRecord& rec, const Json& meta) {
  std::vector<std::string> header{"time"};
  header.insert(header.end(), rec.columns.begin(), rec.columns.end());
  CsvWriter w(meta, header);
  for (std::size_t k = 0; k < rec.times.size(); ++k) {
    std::vector<double> row{rec.times[k]};
    for (const auto& s : rec.series) row.push_back(s[k]);
    w.row(row);
  }
  return w.str();
}

inline Json trajectory_sidecar(const TrajectoryRecord& rec, const CslParams& params, const Grid1D& grid,
                               const TrajectoryConfig& cfg, const Hamiltonian& H) {
  Json obs = Json::array();
  for (auto o : cfg.observables) obs.push_back(to_string(o));
  return Json{{"params", params_json(params)},
              {"grid", grid_json(grid)},
              {"seed", rec.seed},
              {"stream", rec.stream},
              {"dt", cfg.dt},
              {"n_steps", cfg.n_steps},
              {"snapshot_stride", cfg.snapshot_stride},
              {"observables", obs},
              {"hamiltonian", to_string(H.kind)},
              {"kinetic_scheme", to_string(H.kinetic)},
              {"step_scheme", to_string(cfg.step.scheme)}};
}

// -------------------------------------------------------------- density matrix

inline std::string density_csv(const DensityMatrix& rho, const Json& meta) {
  CsvWriter w(meta, {"a", "b", "re", "im"});
  const auto& m = rho.elements();
  for (Eigen::Index a = 0; a < m.rows(); ++a)
    for (Eigen::Index b = 0; b < m.cols(); ++b)
      w.row({static_cast<double>(a), static_cast<double>(b), m(a, b).real(), m(a, b).imag()});
  return w.str();
}

/// Binary snapshot layout, all little-endian:
///   8 bytes  magic "CSLRHO01"
///   uint64   n_sites
///   float64  dx
///   float64  x_min
///   n_sites² pairs (re, im) of float64, row-major.
inline constexpr char kRhoMagic[9] = "CSLRHO01";

namespace detail {

template <class T>
void put_le(std::string& out, T v) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get_le(const std::string& in, std::size_t& pos) {
  require(pos + sizeof(T) <= in.size(), ErrorCode::Io, "density snapshot truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace detail

inline std::string density_binary(const DensityMatrix& rho) {
  std::string out(kRhoMagic, 8);
  const auto& m = rho.elements();
  detail::put_le<std::uint64_t>(out, rho.size());
  detail::put_le<double>(out, rho.grid().dx());
  detail::put_le<double>(out, rho.grid().x_min());
  for (Eigen::Index a = 0; a < m.rows(); ++a)
    for (Eigen::Index b = 0; b < m.cols(); ++b) {
      detail::put_le<double>(out, m(a, b).real());
      detail::put_le<double>(out, m(a, b).imag());
    }
  return out;
}

inline DensityMatrix read_density_binary(const std::string& bytes) {
  require(bytes.size() >= 8 && bytes.compare(0, 8, kRhoMagic) == 0, ErrorCode::Io, "not a density snapshot");
  std::size_t pos = 8;
  const auto n = detail::get_le<std::uint64_t>(bytes, pos);
  const double dx = detail::get_le<double>(bytes, pos);
  const double x_min = detail::get_le<double>(bytes, pos);
  require(bytes.size() == pos + n * n * 16, ErrorCode::Io, "density snapshot payload has the wrong size");
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index a = 0; a < m.rows(); ++a)
    for (Eigen::Index b = 0; b < m.cols(); ++b) {
      const double re = detail::get_le<double>(bytes, pos);
      m(a, b) = cplx(re, detail::get_le<double>(bytes, pos));
    }
  return DensityMatrix(Grid1D(n, dx, x_min), std::move(m));
}

// ----------------------------------------------------------------------- born

inline Json born_json(const BornResult& r, const CslParams& params, const Json& extra = Json::object()) {
  Json j{{"alpha", {r.alpha.real(), r.alpha.imag()}},
         {"beta", {r.beta.real(), r.beta.imag()}},
         {"separation", r.separation},
         {"decay_rate", r.decay_rate},
         {"dt", r.dt},
         {"t_max", r.t_max},
         {"epsilon", r.epsilon},
         {"n_traj", r.n_traj},
         {"n_left", r.n_left},
         {"n_right", r.n_right},
         {"n_undecided", r.n_undecided},
         {"f_left", r.f_left},
         {"f_right", r.f_right},
         {"se_left", r.se_left},
         {"se_right", r.se_right},
         {"mean_collapse_time", r.mean_collapse_time},
         {"sd_collapse_time", r.sd_collapse_time},
         {"base_seed", r.base_seed},
         {"params", params_json(params)}};
  for (const auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

inline std::string decisions_csv(const std::vector<TrajectoryDecision>& d, const Json& meta) {
  CsvWriter w(meta, {"trajectory", "decision", "time"});
  for (const auto& x : d) w.raw_row({std::to_string(x.index), to_string(x.decision), fmt(x.time)});
  return w.str();
}

// ------------------------------------------------------------------ exclusion

inline std::string exclusion_csv(const ExclusionGrid& g, const Json& meta) {
  CsvWriter w(meta, {"lambda", "r_C", "excluded", "binding_record"});
  for (std::size_t i = 0; i < g.r_C_axis.size(); ++i)
    for (std::size_t j = 0; j < g.lambda_axis.size(); ++j)
      w.raw_row({fmt(g.lambda_axis[j]), fmt(g.r_C_axis[i]), g.is_excluded(i, j) ? "1" : "0", g.binding[g.index(i, j)]});
  return w.str();
}

inline Json bound_record_json(const BoundRecord& r) {
  return Json{{"name", r.name},         {"kind", to_string(r.kind)},     {"mass", r.mass},
              {"flight_time", r.flight_time}, {"power_limit", r.power_limit}, {"r_C_assumed", r.r_C_assumed},
              {"lambda_max", r.lambda_max}, {"source", r.source}};
}

/// Reads a JSON array of bound records. Interferometry and heating records
/// may omit lambda_max, which is then derived at r_C_assumed.
inline std::vector<BoundRecord> bound_records_from_json(const Json& j, BoundUnits units = {}) {
  require(j.is_array(), ErrorCode::ConfigError, "bound records: expected a JSON array");
  std::vector<BoundRecord> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    const std::string at = "bounds[" + std::to_string(i) + "]";
    try {
      BoundRecord r;
      r.name = e.at("name").get<std::string>();
      r.kind = bound_kind_from_string(e.at("kind").get<std::string>());
      r.mass = e.value("mass", 0.0);
      r.flight_time = e.value("flight_time", 0.0);
      r.power_limit = e.value("power_limit", 0.0);
      r.r_C_assumed = e.at("r_C_assumed").get<double>();
      r.source = e.value("source", std::string());
      if (e.contains("lambda_max")) {
        r.lambda_max = e.at("lambda_max").get<double>();
      } else if (r.kind != BoundKind::Quoted) {
        r.lambda_max = *r.bound_at(r.r_C_assumed, units);
      }
      r.validate();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::ConfigError, at + ": " + ex.what());
    } catch (const Error& ex) {
      throw Error(ErrorCode::ConfigError, at + ": " + ex.detail());
    }
  }
  return out;
}

// ------------------------------------------------------------- matrix systems

inline Json matrix_json(const td::Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back({m(i, k).real(), m(i, k).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline td::Matrix matrix_from_json(const Json& j) {
  require(j.is_array() && !j.empty(), ErrorCode::ConfigError, "matrix: expected a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  td::Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    require(row.is_array() && static_cast<Eigen::Index>(row.size()) == n, ErrorCode::ConfigError,
            "matrix: rows must form a square array");
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto& z = row[static_cast<std::size_t>(k)];
      require(z.is_array() && z.size() == 2, ErrorCode::ConfigError, "matrix: entries must be [re, im] pairs");
      m(i, k) = cplx(z[0].get<double>(), z[1].get<double>());
    }
  }
  return m;
}

inline Json system_json(const td::System& sys) {
  Json arr = Json::array();
  for (const auto& d : sys) arr.push_back(Json{{"label", d.label}, {"q", matrix_json(d.q)}, {"p", matrix_json(d.p)}});
  return arr;
}

inline td::System system_from_json(const Json& j) {
  require(j.is_array(), ErrorCode::ConfigError, "matrix system: expected an array of degrees of freedom");
  td::System sys;
  for (const auto& e : j) {
    td::MatrixDegree d{e.value("label", std::string()), matrix_from_json(e.at("q")), matrix_from_json(e.at("p"))};
    d.validate();
    sys.push_back(std::move(d));
  }
  return sys;
}

}  // namespace csl::io
