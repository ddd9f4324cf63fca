// Copyright 2026 The sqp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqp/hamilton_ehrenfest.hpp"
#include "sqp/reference_solver.hpp"

namespace sqp {

/// Comma-separated table with round-trip (%.17e) number formatting.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

std::string format_number(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

/// Columns: t, then per particle s (1-based): X_s, P_s (n each), mu0_s, mu2_s,
/// d1_s_* (Δ^(2)_i), d2_s_* (packed Δ^(2)_ij), d3_s_* (packed Δ^(3)_ijk, order 3
/// runs), Xc_s and Xcn_s (trajectory shifted by the second-order centroid
/// under the unnormalized and per-unit-mass readings). Every `stride`-th sample
/// and the last one are written.
void write_he_csv(const std::filesystem::path& path, const HeSeries& series, int stride = 1);

/// Columns: x, re, im, density.
void write_field_csv(const std::filesystem::path& path, const Eigen::VectorXd& x,
                     const Eigen::VectorXcd& psi);

/// Interleaved little-endian float64 (re, im) plus a JSON sidecar `<path>.json`.
void write_field_binary(const std::filesystem::path& path, const Eigen::VectorXcd& psi,
                        const nlohmann::json& meta);
Eigen::VectorXcd read_field_binary(const std::filesystem::path& path);

/// Hex SHA-256 of a file's contents.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace sqp
