#ifndef MSSVDD_IO_HPP
#define MSSVDD_IO_HPP

// Serialization: versioned JSON model files, JSON configuration, report CSVs
// and the text table rendering of a report.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mssvdd/datamodel.hpp"
#include "mssvdd/eval.hpp"
#include "mssvdd/model.hpp"

namespace mssvdd {

using Json = nlohmann::json;

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// base64 of little-endian float64 arrays

namespace detail {

inline constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kB64[(v >> 18) & 63], out += kB64[(v >> 12) & 63], out += kB64[(v >> 6) & 63], out += kB64[v & 63];
  }
  if (const auto rest = bytes.size() - i; rest > 0) {
    std::uint32_t v = bytes[i] << 16;
    if (rest == 2) v |= bytes[i + 1] << 8;
    out += kB64[(v >> 18) & 63], out += kB64[(v >> 12) & 63];
    out += rest == 2 ? kB64[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

inline std::vector<std::uint8_t> base64_decode(const std::string& text) {
  std::array<int, 256> lookup{};
  lookup.fill(-1);
  for (int i = 0; i < 64; ++i) lookup[static_cast<unsigned char>(kB64[i])] = i;
  if (text.size() % 4 != 0) throw DataFormatError("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::uint32_t v = 0;
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=') {
        ++pad;
        v <<= 6;
        continue;
      }
      const int x = lookup[static_cast<unsigned char>(c)];
      if (x < 0 || pad) throw DataFormatError("invalid base64 character");
      v = (v << 6) | static_cast<std::uint32_t>(x);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

inline std::vector<std::uint8_t> to_le_bytes(const double* data, std::size_t n) {
  std::vector<std::uint8_t> bytes(n * 8);
  for (std::size_t i = 0; i < n; ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(data[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  return bytes;
}

inline std::vector<double> from_le_bytes(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() % 8 != 0) throw DataFormatError("float64 payload length is not a multiple of 8");
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

}  // namespace detail

/// {"rows", "cols", "data"}: column-major float64, little endian, base64.
inline Json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"data", detail::base64_encode(detail::to_le_bytes(m.data(), static_cast<std::size_t>(m.size())))}};
}

inline Matrix matrix_from_json(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto values = detail::from_le_bytes(detail::base64_decode(j.at("data").get<std::string>()));
  if (static_cast<Eigen::Index>(values.size()) != rows * cols) throw DataFormatError("matrix payload size mismatch");
  Matrix m(rows, cols);
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

inline Json vector_to_json(const Vector& v) { return matrix_to_json(Matrix(v)); }
inline Vector vector_from_json(const Json& j) {
  Matrix m = matrix_from_json(j);
  if (m.cols() != 1 && m.size() != 0) throw DataFormatError("expected a column vector");
  return Eigen::Map<Vector>(m.data(), m.size());
}

// ---------------------------------------------------------------------------
// Configuration

inline Json config_to_json(const TrainConfig& c) {
  return {{"method", to_string(c.method)},
          {"d", c.d},
          {"eta", c.eta},
          {"beta", c.beta},
          {"C", c.c_penalty},
          {"nu", c.nu},
          {"max_iter", c.max_iter},
          {"update", to_string(c.update_strategy)},
          {"regularizer", to_string(c.regularizer)},
          {"kernelized", c.kernelized},
          {"kernel", to_string(c.kernel_params.kind)},
          {"gamma", c.kernel_params.gamma},
          {"sigma", c.kernel_params.sigma},
          {"kappa", c.kernel_params.kappa},
          {"theta", c.kernel_params.theta},
          {"kappa_from_d", c.kappa_from_d},
          {"decision", to_string(c.decision_strategy)},
          {"normalize", c.normalize},
          {"kkt_tol", c.kkt_tol},
          {"eig_rel_tol", c.eig_rel_tol}};
}

/// Overlays the keys present in `j` onto `base`. Unknown keys are ignored so a
/// training config can live in the same file as experiment settings.
inline TrainConfig config_from_json(const Json& j, TrainConfig c = {}) {
  auto str = [&](const char* k) { return j.at(k).get<std::string>(); };
  if (j.contains("method")) c.method = parse_method(str("method"));
  if (j.contains("d")) c.d = j.at("d").get<std::size_t>();
  if (j.contains("eta")) c.eta = j.at("eta").get<double>();
  if (j.contains("beta")) c.beta = j.at("beta").get<double>();
  if (j.contains("C")) c.c_penalty = j.at("C").get<double>();
  if (j.contains("nu")) c.nu = j.at("nu").get<double>();
  if (j.contains("max_iter")) c.max_iter = j.at("max_iter").get<std::size_t>();
  if (j.contains("update")) c.update_strategy = parse_update_strategy(str("update"));
  if (j.contains("regularizer")) c.regularizer = parse_regularizer(str("regularizer"));
  if (j.contains("kernel")) {
    c.kernel_params.kind = parse_kernel_kind(str("kernel"));
    if (!j.contains("kernelized")) c.kernelized = c.kernel_params.kind != KernelKind::linear;
  }
  if (j.contains("kernelized")) c.kernelized = j.at("kernelized").get<bool>();
  if (j.contains("gamma")) c.kernel_params.gamma = j.at("gamma").get<double>();
  if (j.contains("sigma")) c.kernel_params.sigma = j.at("sigma").get<double>();
  if (j.contains("theta")) c.kernel_params.theta = j.at("theta").get<double>();
  if (j.contains("kappa_from_d")) c.kappa_from_d = j.at("kappa_from_d").get<bool>();
  if (j.contains("kappa")) {
    c.kernel_params.kappa = j.at("kappa").get<double>();
    if (!j.contains("kappa_from_d")) c.kappa_from_d = false;
  }
  if (j.contains("decision")) c.decision_strategy = parse_decision_strategy(str("decision"));
  if (j.contains("normalize")) c.normalize = j.at("normalize").get<bool>();
  if (j.contains("kkt_tol")) c.kkt_tol = j.at("kkt_tol").get<double>();
  if (j.contains("eig_rel_tol")) c.eig_rel_tol = j.at("eig_rel_tol").get<double>();
  return c;
}

inline Json grid_to_json(const GridSpec& g) {
  Json j{{"sigma", g.sigma}, {"eta", g.eta}, {"beta", g.beta}, {"C", g.c}, {"nu", g.nu}, {"d", g.d}};
  for (auto u : g.updates) j["update"].push_back(to_string(u));
  for (auto r : g.regularizers) j["regularizer"].push_back(to_string(r));
  for (auto d : g.decisions) j["decision"].push_back(to_string(d));
  return j;
}

/// Axes absent from `j` keep the default grids.
inline GridSpec grid_from_json(const Json& j, GridSpec g = {}) {
  if (j.contains("sigma")) g.sigma = j.at("sigma").get<std::vector<double>>();
  if (j.contains("eta")) g.eta = j.at("eta").get<std::vector<double>>();
  if (j.contains("beta")) g.beta = j.at("beta").get<std::vector<double>>();
  if (j.contains("C")) g.c = j.at("C").get<std::vector<double>>();
  if (j.contains("nu")) g.nu = j.at("nu").get<std::vector<double>>();
  if (j.contains("d")) g.d = j.at("d").get<std::vector<std::size_t>>();
  if (j.contains("update")) {
    g.updates.clear();
    for (const auto& s : j.at("update")) g.updates.push_back(parse_update_strategy(s.get<std::string>()));
  }
  if (j.contains("regularizer")) {
    g.regularizers.clear();
    for (const auto& s : j.at("regularizer")) g.regularizers.push_back(parse_regularizer(s.get<std::string>()));
  }
  if (j.contains("decision")) {
    g.decisions.clear();
    for (const auto& s : j.at("decision")) g.decisions.push_back(parse_decision_strategy(s.get<std::string>()));
  }
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------
// Model files

struct Provenance {
  std::uint64_t seed = 0;
  std::string dataset_digest;
  std::string tool_version = kToolVersion;
};

/// FNV-1a over the raw feature bytes and labels.
inline std::string dataset_digest(const MultiModalDataset& data) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const std::vector<std::uint8_t>& bytes) {
    for (auto b : bytes) h = (h ^ b) * 1099511628211ULL;
  };
  for (const auto& m : data.modalities())
    mix(detail::to_le_bytes(m.values().data(), static_cast<std::size_t>(m.values().size())));
  if (data.has_labels()) {
    std::vector<std::uint8_t> l;
    for (auto x : data.labels()) l.push_back(static_cast<std::uint8_t>(x));
    mix(l);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline Json kernel_to_json(const KernelParams& k) {
  return {{"kind", to_string(k.kind)}, {"gamma", k.gamma}, {"sigma", k.sigma}, {"kappa", k.kappa}, {"theta", k.theta}};
}

inline KernelParams kernel_from_json(const Json& j) {
  KernelParams k;
  k.kind = parse_kernel_kind(j.at("kind").get<std::string>());
  k.gamma = j.at("gamma").get<double>();
  k.sigma = j.at("sigma").get<double>();
  k.kappa = j.at("kappa").get<double>();
  k.theta = j.at("theta").get<double>();
  return k;
}

inline Json model_to_json(const Model& m, const Provenance& prov = {}) {
  Json j;
  j["format"] = "mssvdd-model";
  j["version"] = kModelFormatVersion;
  j["provenance"] = {{"seed", prov.seed}, {"dataset_digest", prov.dataset_digest}, {"tool_version", prov.tool_version}};
  j["config"] = config_to_json(m.config);
  j["kernel"] = kernel_to_json(m.config.kernel_params);
  j["modality_dims"] = m.modality_dims;
  j["scalers"] = Json::array();
  for (const auto& s : m.scalers) j["scalers"].push_back({{"mean", vector_to_json(s.mean)}, {"scale", vector_to_json(s.scale)}});
  j["npt"] = Json::array();
  for (const auto& s : m.npt_states)
    j["npt"].push_back({{"kernel", kernel_to_json(s.params)},
                        {"train_data", matrix_to_json(s.train_data)},
                        {"train_kernel", matrix_to_json(s.train_kernel)},
                        {"row_means", vector_to_json(s.row_means)},
                        {"grand_mean", matrix_to_json(Matrix::Constant(1, 1, s.grand_mean))},
                        {"eigvecs", matrix_to_json(s.eigvecs)},
                        {"eigvals", vector_to_json(s.eigvals)},
                        {"embedded", matrix_to_json(s.embedded)},
                        {"discarded_negative_mass", s.discarded_negative_mass}});
  j["projections"] = Json::array();
  for (const auto& q : m.projections) j["projections"].push_back(matrix_to_json(q.q()));
  if (m.svdd)
    j["svdd"] = {{"alphas", vector_to_json(m.svdd->alphas)},
                 {"C", m.svdd->c_penalty},
                 {"radius_sq", matrix_to_json(Matrix::Constant(1, 1, m.svdd->radius_sq))},
                 {"train_points", matrix_to_json(m.svdd->train_points)}};
  if (m.ocsvm)
    j["ocsvm"] = {{"alphas", vector_to_json(m.ocsvm->alphas)},
                  {"nu", m.ocsvm->nu},
                  {"rho", matrix_to_json(Matrix::Constant(1, 1, m.ocsvm->rho))},
                  {"train_points", matrix_to_json(m.ocsvm->train_points)}};
  j["diagnostics"] = {{"iterations_completed", m.iterations_completed},
                      {"max_orthonormality_error", m.max_orthonormality_error},
                      {"warning", m.warning}};
  return j;
}

inline Model model_from_json(const Json& j) {
  if (j.value("format", "") != "mssvdd-model") throw DataFormatError("not a model file");
  const int version = j.at("version").get<int>();
  if (version != kModelFormatVersion)
    throw DataFormatError("model format version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kModelFormatVersion) + ")");
  auto scalar = [](const Json& x) { return matrix_from_json(x)(0, 0); };
  Model m;
  m.config = config_from_json(j.at("config"));
  m.config.kernel_params = kernel_from_json(j.at("kernel"));
  m.modality_dims = j.at("modality_dims").get<std::vector<Eigen::Index>>();
  for (const auto& s : j.at("scalers"))
    m.scalers.push_back({vector_from_json(s.at("mean")), vector_from_json(s.at("scale"))});
  for (const auto& s : j.at("npt")) {
    NptState st;
    st.params = kernel_from_json(s.at("kernel"));
    st.train_data = matrix_from_json(s.at("train_data"));
    st.train_kernel = matrix_from_json(s.at("train_kernel"));
    st.row_means = vector_from_json(s.at("row_means"));
    st.grand_mean = scalar(s.at("grand_mean"));
    st.eigvecs = matrix_from_json(s.at("eigvecs"));
    st.eigvals = vector_from_json(s.at("eigvals"));
    st.embedded = matrix_from_json(s.at("embedded"));
    st.discarded_negative_mass = s.at("discarded_negative_mass").get<double>();
    m.npt_states.push_back(std::move(st));
  }
  for (const auto& q : j.at("projections")) m.projections.emplace_back(matrix_from_json(q));
  if (j.contains("svdd")) {
    const auto& s = j.at("svdd");
    DataDescription d;
    d.alphas = vector_from_json(s.at("alphas"));
    d.c_penalty = s.at("C").get<double>();
    d.train_points = matrix_from_json(s.at("train_points"));
    finalize_description(d);
    d.radius_sq = scalar(s.at("radius_sq"));
    m.svdd = std::move(d);
  }
  if (j.contains("ocsvm")) {
    const auto& s = j.at("ocsvm");
    OcsvmDescription d;
    d.alphas = vector_from_json(s.at("alphas"));
    d.nu = s.at("nu").get<double>();
    d.rho = scalar(s.at("rho"));
    d.train_points = matrix_from_json(s.at("train_points"));
    finalize_ocsvm(d);
    m.ocsvm = std::move(d);
  }
  if (!m.svdd && !m.ocsvm) throw DataFormatError("model file has no data description");
  const auto& diag = j.at("diagnostics");
  m.iterations_completed = diag.at("iterations_completed").get<std::size_t>();
  m.max_orthonormality_error = diag.at("max_orthonormality_error").get<double>();
  m.warning = diag.at("warning").get<std::string>();
  return m;
}

/// Writes to a sibling temporary file and renames it into place.
inline void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataFormatError("cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw DataFormatError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void save_model(const std::filesystem::path& path, const Model& m, const Provenance& prov = {}) {
  write_file_atomically(path, model_to_json(m, prov).dump(1) + "\n");
}

inline Model load_model(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw DataFormatError(path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

// ---------------------------------------------------------------------------
// Reports

namespace detail {

inline std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

inline std::string os_symbol(const TrainConfig& c) {
  if (!c.uses_subspace()) return "NA";
  switch (c.update_strategy) {
    case UpdateStrategy::sd_minus: return "--";
    case UpdateStrategy::sd_plus: return "++";
    case UpdateStrategy::ad_minus_plus: return "-+";
    case UpdateStrategy::ad_plus_minus: return "+-";
  }
  return "NA";
}

inline std::string reg_symbol(const TrainConfig& c) {
  return c.uses_subspace() ? std::string(to_string(c.regularizer)) : "NA";
}

}  // namespace detail

/// Display name such as "MS-SVDD-CK_ds1" or "SVDD".
inline std::string model_label(const TrainConfig& c) {
  std::string name;
  switch (c.method) {
    case Method::svdd: name = "SVDD"; break;
    case Method::ocsvm: name = "OC-SVM"; break;
    case Method::s_svdd: name = "S-SVDD"; break;
    case Method::ms_svdd: name = "MS-SVDD"; break;
  }
  if (c.method == Method::ms_svdd && c.kernelized && c.kernel_params.kind == KernelKind::composite) name += "-CK";
  if (c.method == Method::ms_svdd) name += "_" + std::string(to_string(c.decision_strategy));
  return name;
}

inline const char* kReportHeader =
    "model,fold,method,kernel,os,reg,ds,d,C,nu,eta,beta,sigma,tp,fn,fp,tn,sen,spe,pre,f1,acc,gm";

inline std::string report_row(const std::string& model, const std::string& fold, const TrainConfig& c,
                              const std::string& os, const std::string& reg, const ConfusionMatrix* cm,
                              const MetricSet& m) {
  using detail::fixed6;
  std::string s = model + "," + fold + "," + std::string(to_string(c.method)) + "," +
                  (c.kernelized ? std::string(to_string(c.kernel_params.kind)) : "none") + "," + os + "," + reg + "," +
                  std::string(to_string(c.decision_strategy)) + "," + std::to_string(c.d) + "," + fixed6(c.c_penalty) +
                  "," + fixed6(c.nu) + "," + fixed6(c.eta) + "," + fixed6(c.beta) + "," + fixed6(c.kernel_params.sigma) +
                  ",";
  if (cm) s += std::to_string(cm->tp) + "," + std::to_string(cm->fn) + "," + std::to_string(cm->fp) + "," + std::to_string(cm->tn);
  else s += ",,,";
  for (double x : {m.sen, m.spe, m.pre, m.f1, m.acc, m.gm}) s += "," + fixed6(x);
  return s;
}

/// One row per fold, then a "mean" row (average of fold metrics) and a
/// "pooled" row (metrics of the summed confusion matrix).
inline std::string report_to_csv(const EvalReport& r, bool with_header = true) {
  std::string out;
  if (with_header) out += std::string(kReportHeader) + "\n";
  if (r.folds.empty()) return out;
  const auto& first = r.folds.front().config;
  const std::string name = r.name.empty() ? model_label(first) : r.name;
  bool uniform_os = true, uniform_reg = true;
  for (const auto& f : r.folds) {
    uniform_os &= detail::os_symbol(f.config) == detail::os_symbol(first);
    uniform_reg &= detail::reg_symbol(f.config) == detail::reg_symbol(first);
    out += report_row(name, std::to_string(f.fold), f.config, detail::os_symbol(f.config),
                      detail::reg_symbol(f.config), &f.cm, f.metrics) + "\n";
  }
  const std::string os = uniform_os ? detail::os_symbol(first) : "mixed";
  const std::string reg = uniform_reg ? detail::reg_symbol(first) : "mixed";
  out += report_row(name, "mean", first, os, reg, nullptr, r.mean) + "\n";
  out += report_row(name, "pooled", first, os, reg, &r.pooled, r.pooled_metrics) + "\n";
  return out;
}

struct ReportSummaryRow {
  std::string model, os, reg;
  MetricSet mean;
  std::optional<ConfusionMatrix> pooled;
};

/// Reads the "mean" and "pooled" rows of a report CSV.
inline std::vector<ReportSummaryRow> read_report_csv(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty() || detail::trim(lines.front()) != kReportHeader)
    throw DataFormatError(path.string() + ": not a report CSV");
  std::vector<ReportSummaryRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = detail::split_cells(lines[i]);
    if (cells.size() != 23) throw DataFormatError(path.string() + ":" + std::to_string(i + 1) + ": expected 23 columns");
    auto num = [&](std::size_t k) {
      const auto v = detail::parse_double(cells[k]);
      if (!v) throw DataFormatError(path.string() + ":" + std::to_string(i + 1) + ": bad number");
      return *v;
    };
    if (cells[1] == "mean") {
      ReportSummaryRow r{std::string(cells[0]), std::string(cells[4]), std::string(cells[5]), {}, {}};
      r.mean = {num(17), num(18), num(19), num(20), num(21), num(22)};
      rows.push_back(r);
    } else if (cells[1] == "pooled" && !rows.empty() && rows.back().model == cells[0]) {
      rows.back().pooled = ConfusionMatrix{static_cast<std::size_t>(num(13)), static_cast<std::size_t>(num(14)),
                                           static_cast<std::size_t>(num(15)), static_cast<std::size_t>(num(16))};
    }
  }
  return rows;
}

/// Columns: Model, OS, r, Sen, Spe, Pre, F1, Acc, GM (percent, two decimals).
inline std::string render_table(const std::vector<ReportSummaryRow>& rows) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-18s %-5s %-7s %7s %7s %7s %7s %7s %7s\n", "Model", "OS", "r", "Sen", "Spe", "Pre",
                "F1", "Acc", "GM");
  out += buf;
  for (const auto& r : rows) {
    const auto& m = r.mean;
    std::snprintf(buf, sizeof buf, "%-18s %-5s %-7s %7.2f %7.2f %7.2f %7.2f %7.2f %7.2f\n", r.model.c_str(),
                  r.os.c_str(), r.reg.c_str(), 100 * m.sen, 100 * m.spe, 100 * m.pre, 100 * m.f1, 100 * m.acc,
                  100 * m.gm);
    out += buf;
    if (r.pooled) {
      std::snprintf(buf, sizeof buf, "%-18s pooled confusion: tp=%zu fn=%zu fp=%zu tn=%zu\n", "", r.pooled->tp,
                    r.pooled->fn, r.pooled->fp, r.pooled->tn);
      out += buf;
    }
  }
  return out;
}

inline std::string render_table(const EvalReport& r) {
  if (r.folds.empty()) return render_table(std::vector<ReportSummaryRow>{});
  const auto& c = r.folds.front().config;
  return render_table({{r.name.empty() ? model_label(c) : r.name, detail::os_symbol(c), detail::reg_symbol(c), r.mean,
                        r.pooled}});
}

inline std::string grid_scores_to_csv(const GridSearchResult& g) {
  std::string out = "cell,method,kernel,os,reg,ds,d,C,nu,eta,beta,sigma,ok,mean_gm,error\n";
  for (std::size_t i = 0; i < g.table.size(); ++i) {
    const auto& cell = g.table[i];
    const auto& c = cell.config;
    std::string err = cell.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out += std::to_string(i) + "," + std::string(to_string(c.method)) + "," +
           (c.kernelized ? std::string(to_string(c.kernel_params.kind)) : "none") + "," + detail::os_symbol(c) + "," +
           detail::reg_symbol(c) + "," + std::string(to_string(c.decision_strategy)) + "," + std::to_string(c.d) + "," +
           detail::fixed6(c.c_penalty) + "," + detail::fixed6(c.nu) + "," + detail::fixed6(c.eta) + "," +
           detail::fixed6(c.beta) + "," + detail::fixed6(c.kernel_params.sigma) + "," + (cell.ok ? "1" : "0") + "," +
           detail::fixed6(cell.mean_gm) + "," + err + "\n";
  }
  return out;
}

inline std::string prediction_to_csv(const MultiModalDataset& data, const Prediction& p) {
  std::string out = "sample_id,fused";
  const auto nviews = p.per_view.size();
  for (std::size_t v = 0; v < nviews; ++v) out += ",label_" + std::to_string(v);
  const std::string score = p.scores_are_distances ? ",distance_sq_" : ",decision_";
  for (std::size_t v = 0; v < nviews; ++v) out += score + std::to_string(v);
  out += ",radius_sq\n";
  for (std::size_t i = 0; i < p.fused.size(); ++i) {
    out += data.sample_ids()[i] + "," + (p.fused[i] == Label::target ? "1" : "0");
    for (std::size_t v = 0; v < nviews; ++v) out += p.per_view[v][i] == Label::target ? ",1" : ",0";
    for (std::size_t v = 0; v < nviews; ++v) out += "," + detail::format_double(p.scores[v][i]);
    out += "," + detail::format_double(p.radius_sq) + "\n";
  }
  return out;
}

}  // namespace mssvdd

#endif  // MSSVDD_IO_HPP
