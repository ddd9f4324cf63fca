// Copyright 2026 The sqp Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqp/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "sqp/errors.hpp"

namespace sqp {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
  if (!out_) throw Error("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw Error("CSV row has the wrong number of columns");
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
  out_ << '\n';
}

std::vector<double> CsvTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] != name) continue;
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.at(c));
    return out;
  }
  throw Error("CSV has no column '" + name + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) return t;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_he_csv(const std::filesystem::path& path, const HeSeries& series, int stride) {
  const auto& first = series.states.front();
  const int K = first.size();
  const int n = first.dim();
  const int d = 2 * n;
  const bool third = series.options.order >= 3;
  const auto tuples2 = sorted_index_tuples(d, 2);
  const auto tuples3 = sorted_index_tuples(d, 3);
  auto tag = [](const std::vector<int>& idx) {
    std::string s;
    for (int i : idx) s += std::to_string(i + 1);
    return s;
  };

  std::vector<std::string> header{"t"};
  for (int s = 1; s <= K; ++s) {
    const auto S = std::to_string(s);
    for (int i = 1; i <= n; ++i) header.push_back("X_" + S + (n > 1 ? "_" + std::to_string(i) : ""));
    for (int i = 1; i <= n; ++i) header.push_back("P_" + S + (n > 1 ? "_" + std::to_string(i) : ""));
    header.push_back("mu0_" + S);
    header.push_back("mu2_" + S);
    for (int i = 0; i < d; ++i) header.push_back("d1_" + S + "_" + std::to_string(i + 1));
    for (const auto& idx : tuples2) header.push_back("d2_" + S + "_" + tag(idx));
    if (third)
      for (const auto& idx : tuples3) header.push_back("d3_" + S + "_" + tag(idx));
    for (int i = 1; i <= n; ++i) header.push_back("Xc_" + S + (n > 1 ? "_" + std::to_string(i) : ""));
    for (int i = 1; i <= n; ++i) header.push_back("Xcn_" + S + (n > 1 ? "_" + std::to_string(i) : ""));
  }

  CsvWriter w(path, header);
  const std::size_t step = static_cast<std::size_t>(std::max(stride, 1));
  for (std::size_t k = 0; k < series.t.size(); ++k) {
    if (k % step != 0 && k + 1 != series.t.size()) continue;
    const auto& st = series.states[k];
    std::vector<double> row{series.t[k]};
    for (const auto& p : st.particles) {
      const auto& m = p.moments;
      for (int i = 0; i < n; ++i) row.push_back(p.Z.x[i]);
      for (int i = 0; i < n; ++i) row.push_back(p.Z.p[i]);
      row.push_back(m.mu(0));
      row.push_back(m.mu(2));
      for (int i = 0; i < d; ++i) row.push_back(m.delta(1, 2)[i]);
      for (double v : pack_symmetric(m.delta(2, 2))) row.push_back(v);
      if (third)
        for (double v : pack_symmetric(m.delta(3, 3))) row.push_back(v);
      const double hb = st.hbar;
      const double mass = m.mu(0) + hb * m.mu(2);
      for (int i = 0; i < n; ++i) row.push_back(p.Z.x[i] + hb * m.delta(1, 2)[n + i] / mass);
      for (int i = 0; i < n; ++i) row.push_back(p.Z.x[i] + hb * m.delta(1, 2)[n + i]);
    }
    w.row(row);
  }
}

void write_field_csv(const std::filesystem::path& path, const Eigen::VectorXd& x,
                     const Eigen::VectorXcd& psi) {
  if (x.size() != psi.size()) throw GridMismatch("field and grid differ in length");
  CsvWriter w(path, {"x", "re", "im", "density"});
  for (Eigen::Index i = 0; i < x.size(); ++i)
    w.row({x[i], psi[i].real(), psi[i].imag(), std::norm(psi[i])});
}

void write_field_binary(const std::filesystem::path& path, const Eigen::VectorXcd& psi,
                        const nlohmann::json& meta) {
  static_assert(std::endian::native == std::endian::little, "snapshot writer assumes little endian");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const double v[2] = {psi[i].real(), psi[i].imag()};
    out.write(reinterpret_cast<const char*>(v), sizeof v);
  }
  nlohmann::json side = meta;
  side["dtype"] = "float64";
  side["endianness"] = "little";
  side["layout"] = "interleaved re,im";
  side["shape"] = {psi.size()};
  std::ofstream(path.string() + ".json") << side.dump(2) << '\n';
}

Eigen::VectorXcd read_field_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error("cannot open " + path.string());
  const auto bytes = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  Eigen::VectorXcd psi(static_cast<Eigen::Index>(bytes / (2 * sizeof(double))));
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    double v[2];
    in.read(reinterpret_cast<char*>(v), sizeof v);
    psi[i] = {v[0], v[1]};
  }
  return psi;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

}  // namespace sqp
