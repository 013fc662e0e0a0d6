#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include "bcfm/io.hpp"
#include "json.hpp"

namespace bcfm {
namespace {

using nlohmann::json;

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: '\n' endings everywhere
  if (!out) throw DataError("cannot open " + path + " for writing");
  return out;
}

void finish_write(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw DataError("writing " + path + " failed");
}

double parse_cell(const std::string& field, const std::string& path, int line, int column) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || field.empty())
    throw DataError(path + ": row " + std::to_string(line) + ", column " +
                    std::to_string(column) + ": cannot parse \"" + field + "\" as a number");
  return value;
}

std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

json matrix_json(const Matrix& m) {  // row-major flattening
  json arr = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  return arr;
}

json vector_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json summary_json(const FamilySummary& f) {
  return json{{"mean", matrix_json(f.mean)},
              {"q025", matrix_json(f.q025)},
              {"q975", matrix_json(f.q975)}};
}

void write_json(const std::string& path, const json& doc) {
  std::ofstream out = open_for_write(path);
  out << doc.dump(2) << '\n';
  finish_write(out, path);
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw NumericalError("number formatting failed");
  return std::string(buf, ptr);
}

std::string format_fixed(double x, int places) {
  char buf[512];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed,
                                       places);
  if (ec != std::errc()) throw NumericalError("number formatting failed");
  return std::string(buf, ptr);
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  const std::vector<std::string> names = split_csv_line(std::move(line));
  const int R = static_cast<int>(names.size());
  for (int j = 0; j < R; ++j)
    if (names[j].empty())
      throw DataError(path + ": row 1, column " + std::to_string(j + 1) +
                      ": empty variable name");

  std::vector<double> values;
  int rows = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;  // ignore a trailing blank line
    const std::vector<std::string> fields = split_csv_line(std::move(line));
    if (static_cast<int>(fields.size()) != R)
      throw DataError(path + ": row " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected " + std::to_string(R));
    for (int j = 0; j < R; ++j) values.push_back(parse_cell(fields[j], path, line_no, j + 1));
    ++rows;
  }
  if (in.bad()) throw DataError("reading " + path + " failed");

  Matrix Y(rows, R);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < R; ++j) Y(i, j) = values[static_cast<std::size_t>(i) * R + j];
  try {
    return Dataset::create(std::move(Y), names);
  } catch (const Error& ex) {
    throw DataError(path + ": " + ex.what());
  }
}

void write_dataset(const std::string& path, const Dataset& data) {
  std::ofstream out = open_for_write(path);
  for (int j = 0; j < data.R(); ++j) {
    const std::string& name = data.variable_names[j];
    if (name.find(',') != std::string::npos || name.find('\n') != std::string::npos)
      throw DataError("variable name \"" + name + "\" contains a separator");
    out << (j ? "," : "") << name;
  }
  out << '\n';
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.R(); ++j)
      out << (j ? "," : "") << format_double(data.Y(i, j));
    out << '\n';
  }
  finish_write(out, path);
}

void write_truth(const std::string& path, const GroundTruth& truth) {
  json z = json::array();
  for (int zi : truth.z) z.push_back(zi + 1);
  json omega = json::array();
  for (const Matrix& om : truth.omega) omega.push_back(matrix_json(om));
  write_json(path, json{{"n", truth.z.size()},
                        {"R", truth.B.rows()},
                        {"K", truth.p.size()},
                        {"F", truth.B.cols()},
                        {"z", std::move(z)},
                        {"X", matrix_json(truth.X)},
                        {"B", matrix_json(truth.B)},
                        {"mu", matrix_json(truth.mu)},
                        {"omega", std::move(omega)},
                        {"p", vector_json(truth.p)},
                        {"tau", vector_json(truth.tau)},
                        {"sigma2", vector_json(truth.sigma2)}});
}

void write_summaries(const std::string& path, const ChainOutput& chain) {
  json omega = json::array();
  for (const FamilySummary& f : chain.summaries.omega) omega.push_back(summary_json(f));
  write_json(path, json{{"n", chain.n},
                        {"R", chain.summaries.B.mean.rows()},
                        {"K", chain.dims.K},
                        {"F", chain.dims.F},
                        {"iterations", chain.config.iterations},
                        {"thin", chain.config.thin},
                        {"burnin_draws", chain.config.burnin_draws},
                        {"seed", chain.config.seed},
                        {"kept_draws", chain.draws.size()},
                        {"B", summary_json(chain.summaries.B)},
                        {"tau", summary_json(chain.summaries.tau)},
                        {"sigma2", summary_json(chain.summaries.sigma2)},
                        {"mu", summary_json(chain.summaries.mu)},
                        {"omega", std::move(omega)},
                        {"p", summary_json(chain.summaries.p)},
                        {"log_joint", summary_json(chain.summaries.log_joint)},
                        {"X_mean", matrix_json(chain.X_mean)}});
}

void write_assignments(const std::string& path, const ChainOutput& chain) {
  std::ofstream out = open_for_write(path);
  out << "subject";
  for (int k = 1; k <= chain.dims.K; ++k) out << ",p_" << k;
  out << ",modal\n";
  for (int i = 0; i < chain.n; ++i) {
    out << (i + 1);
    for (int k = 0; k < chain.dims.K; ++k) out << ',' << format_fixed(chain.assign_prob(i, k), 6);
    out << ',' << (chain.map_labels[i] + 1) << '\n';
  }
  finish_write(out, path);
}

void write_trace(const std::string& path, const ChainOutput& chain) {
  std::ofstream out = open_for_write(path);
  out << "draw,log_joint";
  for (int k = 1; k <= chain.dims.K; ++k) out << ",p_" << k;
  for (int l = 1; l <= chain.dims.F; ++l) out << ",tau_" << l;
  out << ",sigma2_1\n";
  for (std::size_t d = 0; d < chain.draws.size(); ++d) {
    const ParameterDraw& draw = chain.draws[d];
    out << (d + 1) << ',' << format_double(draw.log_joint);
    for (int k = 0; k < chain.dims.K; ++k) out << ',' << format_double(draw.p[k]);
    for (int l = 0; l < chain.dims.F; ++l) out << ',' << format_double(draw.tau[l]);
    out << ',' << format_double(draw.sigma2[0]) << '\n';
  }
  finish_write(out, path);
}

void write_ic_table(const std::string& path, const std::vector<ICRecord>& table) {
  std::ofstream out = open_for_write(path);
  out << "K,F,d,loglik,ic\n";
  for (const ICRecord& rec : table) {
    out << rec.K << ',' << rec.F << ',' << format_double(rec.d) << ','
        << format_double(rec.loglik) << ',' << format_double(rec.ic) << '\n';
  }
  finish_write(out, path);
}

void write_best(const std::string& path, const ICRecord& best) {
  write_json(path, json{{"K", best.K},
                        {"F", best.F},
                        {"d", best.d},
                        {"loglik", best.loglik},
                        {"ic", best.ic},
                        {"min_cluster_size", best.min_cluster_size}});
}

void write_checkpoint(const std::string& path, const ChainError& error) {
  const GibbsState& s = error.checkpoint();
  json z = json::array();
  for (int zi : s.mixture.z) z.push_back(zi + 1);
  json omega = json::array();
  for (const SpdMatrix& om : s.mixture.omega) omega.push_back(matrix_json(om.mat()));
  json mu = json::array();
  for (const Vector& m : s.mixture.mu) mu.push_back(vector_json(m));
  write_json(path, json{{"iteration", error.iteration()},
                        {"block", error.block()},
                        {"message", error.what()},
                        {"state",
                         json{{"B", matrix_json(s.loadings.B)},
                              {"tau", vector_json(s.loadings.tau)},
                              {"sigma2", vector_json(s.noise.sigma2)},
                              {"mu", std::move(mu)},
                              {"omega", std::move(omega)},
                              {"p", vector_json(s.mixture.p)},
                              {"z", std::move(z)},
                              {"X", matrix_json(s.mixture.X)}}}});
}

void write_compare_rows(const std::string& path, const std::vector<CompareRow>& rows) {
  std::ofstream out = open_for_write(path);
  out << "separation,method,replicate,K_hat,F_hat\n";
  for (const CompareRow& row : rows) {
    out << format_double(row.separation) << ',' << row.method << ',' << row.replicate << ','
        << row.K_hat << ',' << row.F_hat << '\n';
  }
  finish_write(out, path);
}

void write_compare_summary(const std::string& path,
                           const std::vector<CompareSummaryRow>& rows) {
  std::ofstream out = open_for_write(path);
  out << "separation,method,replicates,mean_K,se_K,mean_F,se_F\n";
  for (const CompareSummaryRow& row : rows) {
    out << format_double(row.separation) << ',' << row.method << ',' << row.replicates << ','
        << format_double(row.mean_K) << ',' << format_double(row.se_K) << ','
        << format_double(row.mean_F) << ',' << format_double(row.se_F) << '\n';
  }
  finish_write(out, path);
}

}  // namespace bcfm
