// Commands of the command-line tool. Each writes its files into `out` and
// returns a one-line summary for the terminal.
#pragma once

#include "config.hpp"

#include "rodlimit/deformation.hpp"

#include <filesystem>
#include <string>

namespace rodlimit::cli {

// section.json (constants) and chi.csv (S1, S2, chi).
std::string runSection(const RunConfig &cfg, const std::filesystem::path &out);

// model: nonlinear | linear | extensional | coupled. solution.csv and summary.json.
std::string runSolve(const RunConfig &cfg, const std::string &model, const std::filesystem::path &out, int threads);

// decomposition.csv, samples.csv, warping.csv, summary.json (and field.csv
// for generated fields).
std::string runDecompose(const RunConfig &cfg, const std::filesystem::path &out, int threads);

// gamma.csv and gamma.json.
std::string runGamma(const RunConfig &cfg, const std::filesystem::path &out, int threads);

// Field CSV with header S1,S2,s3,v1,v2,v3, rows ordered by axial node then
// section node; S must match the chart's section nodes.
DeformationField3D readFieldCsv(const std::filesystem::path &path, std::shared_ptr<const RodChart> chart);
void writeFieldCsv(const std::filesystem::path &path, const DeformationField3D &field);

} // namespace rodlimit::cli
