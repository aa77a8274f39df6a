#include "bistable/readout.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "bistable/errors.hpp"

namespace bistable {

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
  cell = trim(cell);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
    std::ostringstream msg;
    msg << "series CSV line " << row << ", column " << col + 1 << ": cannot parse '"
        << cell << "' as a number";
    throw ParseError(row, msg.str());
  }
  if (!std::isfinite(v)) {
    std::ostringstream msg;
    msg << "series CSV line " << row << ", column " << col + 1 << ": non-finite value";
    throw ParseError(row, msg.str());
  }
  return v;
}

}  // namespace

void MultiChannelSeries::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw DomainError("series: sample_rate must be positive");
  }
  if (data.rows() < 2) throw DomainError("series: need at least 2 samples");
  if (data.cols() < 1) throw DomainError("series: need at least 1 channel");
  if (static_cast<Eigen::Index>(channels.size()) != data.cols()) {
    throw DomainError("series: channel names do not match data columns");
  }
  if (!data.allFinite()) throw DomainError("series: data must be finite");
}

MultiChannelSeries read_series(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "series CSV: empty input");
  const auto header = split(line);
  if (header.size() < 2 || trim(header[0]) != "t") {
    throw ParseError(1, "series CSV: header must be 't,<channel>,...'");
  }
  MultiChannelSeries s;
  for (std::size_t c = 1; c < header.size(); ++c) s.channels.emplace_back(trim(header[c]));

  std::vector<double> times;
  std::vector<double> values;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      std::ostringstream msg;
      msg << "series CSV line " << row << ": expected " << header.size()
          << " cells, found " << cells.size();
      throw ParseError(row, msg.str());
    }
    times.push_back(parse_cell(cells[0], row, 0));
    for (std::size_t c = 1; c < cells.size(); ++c) values.push_back(parse_cell(cells[c], row, c));
  }
  const std::size_t T = times.size();
  if (T < 2) throw ParseError(row, "series CSV: need at least 2 samples");

  const double first = times[1] - times[0];
  if (!(first > 0.0)) throw ParseError(3, "series CSV: time column must increase");
  for (std::size_t i = 2; i < T; ++i) {
    const double step = times[i] - times[i - 1];
    if (std::abs(step - first) > 1e-9 * first + 1e-15 * std::abs(times[i])) {
      std::ostringstream msg;
      msg << "series CSV line " << i + 2 << ": non-uniform sampling (step " << step
          << ", expected " << first << ")";
      throw ParseError(i + 2, msg.str());
    }
  }
  s.t0 = times.front();
  s.sample_rate = static_cast<double>(T - 1) / (times.back() - times.front());
  const auto m = static_cast<Eigen::Index>(s.channels.size());
  s.data = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(T), m);
  return s;
}

MultiChannelSeries load_series(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open series file " + path.string());
  return read_series(in);
}

void write_series(std::ostream& out, const MultiChannelSeries& s) {
  s.validate();
  out << 't';
  for (const auto& ch : s.channels) out << ',' << ch;
  out << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < s.data.rows(); ++i) {
    out << s.time(static_cast<std::size_t>(i));
    for (Eigen::Index c = 0; c < s.data.cols(); ++c) out << ',' << s.data(i, c);
    out << '\n';
  }
}

void save_series(const std::filesystem::path& path, const MultiChannelSeries& s) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write series file " + path.string());
  write_series(out, s);
}

nlohmann::json to_json(const ReadoutModel& model) {
  nlohmann::json j;
  j["channels"] = model.channels;
  auto& w = j["weights"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < model.weights.rows(); ++r) {
    std::vector<double> row(model.weights.cols());
    for (Eigen::Index c = 0; c < model.weights.cols(); ++c) row[c] = model.weights(r, c);
    w.push_back(row);
  }
  j["bias"] = std::vector<double>(model.bias.data(), model.bias.data() + model.bias.size());
  j["n"] = model.n;
  j["latent_dim"] = model.latent_dim();
  return j;
}

ReadoutModel model_from_json(const nlohmann::json& j) {
  ReadoutModel m;
  try {
    m.channels = j.at("channels").get<std::vector<std::string>>();
    const auto rows = j.at("weights").get<std::vector<std::vector<double>>>();
    const auto bias = j.at("bias").get<std::vector<double>>();
    m.n = j.at("n").get<std::size_t>();
    const auto dim = j.at("latent_dim").get<std::size_t>();
    if (rows.size() != m.channels.size() || bias.size() != m.channels.size()) {
      throw DomainError("readout model: weights/bias rows must match channels");
    }
    m.weights.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != dim) throw DomainError("readout model: ragged weights");
      for (std::size_t c = 0; c < dim; ++c) m.weights(r, c) = rows[r][c];
    }
    m.bias = Eigen::Map<const Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size()));
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("readout model JSON: ") + e.what());
  }
  return m;
}

ReadoutFit fit_affine(const Eigen::MatrixXd& latent, const Eigen::MatrixXd& target) {
  if (latent.rows() != target.rows()) {
    throw DomainError("fit_affine: latent and target sample counts differ");
  }
  if (latent.rows() < 1 || target.cols() < 1) throw DomainError("fit_affine: empty input");
  if (!latent.allFinite() || !target.allFinite()) {
    throw DomainError("fit_affine: non-finite input");
  }
  const Eigen::Index T = latent.rows();
  const Eigen::Index d = latent.cols();
  Eigen::MatrixXd X(T, d + 1);
  X.leftCols(d) = latent;
  X.col(d).setOnes();

  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);
  const Eigen::MatrixXd B = cod.solve(target);  // (d+1) × m

  ReadoutFit fit;
  fit.rank = static_cast<std::size_t>(cod.rank());
  fit.regressors = static_cast<std::size_t>(d + 1);
  fit.model.weights = B.topRows(d).transpose();
  fit.model.bias = B.row(d).transpose();
  const Eigen::MatrixXd residual = X * B - target;
  fit.rmse = (residual.colwise().squaredNorm() / static_cast<double>(T)).cwiseSqrt().transpose();
  return fit;
}

Eigen::MatrixXd align_latent(const NetworkTrajectory& latent,
                             const MultiChannelSeries& target) {
  target.validate();
  if (latent.times.size() < 2) throw DomainError("align_latent: latent too short");
  const double spacing = latent.times[1] - latent.times[0];
  const auto N = static_cast<long long>(latent.times.size());
  const auto dim = static_cast<Eigen::Index>(latent.params.dim());
  Eigen::MatrixXd out(target.data.rows(), dim);
  for (Eigen::Index i = 0; i < target.data.rows(); ++i) {
    const double t = target.time(static_cast<std::size_t>(i));
    const long long idx = std::llround((t - latent.times.front()) / spacing);
    if (idx < 0 || idx >= N) {
      std::ostringstream msg;
      msg << "align_latent: target time " << t << " lies outside the latent run ["
          << latent.times.front() << ", " << latent.times.back() << "]";
      throw DomainError(msg.str());
    }
    out.row(i) = latent.states[static_cast<std::size_t>(idx)].transpose();
  }
  return out;
}

ReadoutFit fit_readout(const NetworkTrajectory& latent, const MultiChannelSeries& target) {
  ReadoutFit fit = fit_affine(align_latent(latent, target), target.data);
  fit.model.channels = target.channels;
  fit.model.n = latent.params.n;
  return fit;
}

MultiChannelSeries synthesize(const ReadoutModel& model, const NetworkTrajectory& latent) {
  const auto dim = static_cast<Eigen::Index>(latent.params.dim());
  if (model.weights.cols() != dim) {
    std::ostringstream msg;
    msg << "synthesize: model expects latent dimension " << model.weights.cols()
        << ", trajectory has " << dim;
    throw DomainError(msg.str());
  }
  if (model.bias.size() != model.weights.rows()) {
    throw DomainError("synthesize: bias length does not match weights");
  }
  if (latent.times.size() < 2) throw DomainError("synthesize: latent too short");
  MultiChannelSeries out;
  out.sample_rate = 1.0 / (latent.times[1] - latent.times[0]);
  out.t0 = latent.times.front();
  out.channels = model.channels;
  if (out.channels.empty()) {
    for (Eigen::Index c = 0; c < model.weights.rows(); ++c) {
      out.channels.push_back("ch" + std::to_string(c + 1));
    }
  }
  out.data.resize(static_cast<Eigen::Index>(latent.states.size()), model.weights.rows());
  for (std::size_t i = 0; i < latent.states.size(); ++i) {
    out.data.row(static_cast<Eigen::Index>(i)) =
        (model.weights * latent.states[i] + model.bias).transpose();
  }
  return out;
}

}  // namespace bistable
