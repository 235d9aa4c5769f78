#include "commands.hpp"

#include "rodlimit/decomposition.hpp"
#include "rodlimit/energy3d.hpp"
#include "rodlimit/error.hpp"
#include "rodlimit/linear_models.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rodlimit::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// CSV with every number in 17-significant-digit form, so that output is
// reproducible and round-trips exactly.
class CsvWriter {
public:
    CsvWriter(const fs::path &path, const std::vector<std::string> &header) : m_path(path), m_out(path) {
        if (!m_out) throw ValidationError(path.string() + ": cannot open for writing");
        for (std::size_t i = 0; i < header.size(); ++i) m_out << (i ? "," : "") << header[i];
        m_out << '\n';
        m_columns = header.size();
    }
    void row(const std::vector<double> &values) {
        if (values.size() != m_columns) throw std::logic_error("csv row width differs from the header");
        char buf[32];
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", values[i]);
            m_out << (i ? "," : "") << buf;
        }
        m_out << '\n';
    }
    ~CsvWriter() = default;

private:
    fs::path m_path;
    std::ofstream m_out;
    std::size_t m_columns = 0;
};

void writeJson(const fs::path &path, const json &doc) {
    std::ofstream out(path);
    if (!out) throw ValidationError(path.string() + ": cannot open for writing");
    out << doc.dump(2) << '\n';
}

void prepareOutput(const fs::path &out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) throw ValidationError(out.string() + ": cannot create output directory");
}

void append(std::vector<double> &row, const Vec3 &v) { row.insert(row.end(), {v.x(), v.y(), v.z()}); }

std::vector<std::string> vecColumns(const std::string &name) { return {name + "1", name + "2", name + "3"}; }

std::vector<std::string> columns(std::initializer_list<std::vector<std::string>> groups) {
    std::vector<std::string> out;
    for (const auto &g : groups) out.insert(out.end(), g.begin(), g.end());
    return out;
}

json numberOrNull(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// Objects every command needs, built with the configuration file as context.
struct Setup {
    std::shared_ptr<const FrameField> frame;
    SectionData section;
};

template <class Fn> auto inContext(const RunConfig &cfg, const std::string &where, Fn &&fn) {
    try {
        return fn();
    } catch (const ValidationError &e) {
        throw ValidationError(cfg.source.string() + ": " + where + ": " + e.what());
    }
}

Setup buildSetup(const RunConfig &cfg) {
    Setup s;
    s.frame = inContext(cfg, "/geometry", [&] { return FrameField::build(MiddleLine::build(cfg.curve), cfg.frame); });
    s.section = inContext(cfg, "/section", [&] { return analyzeSection(cfg.section); });
    return s;
}

json constantsJson(const SectionData &data) {
    const SectionConstants &c = data.constants;
    const CrossSection &s = *data.section;
    return json{{"kind", sectionKindName(s.kind())},
                {"area", c.area},
                {"I1", c.I1},
                {"I2", c.I2},
                {"product_moment", c.productMoment},
                {"K", c.K},
                {"grad_chi_squared", c.gradChiSquared},
                {"chi_mean", c.chiMean},
                {"torsion_residual", c.torsionResidual},
                {"input_centroid", json::array({s.inputCentroid().x(), s.inputCentroid().y()})},
                {"principal_angle", s.principalAngle()},
                {"max_radius", s.maxRadius()},
                {"mesh_size", s.meshSize()},
                {"nodes", s.nodes().size()},
                {"triangles", s.triangles().size()}};
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

} // namespace

// ---------------------------------------------------------------------------

std::string runSection(const RunConfig &cfg, const fs::path &out) {
    const SectionData data = inContext(cfg, "/section", [&] { return analyzeSection(cfg.section); });
    prepareOutput(out);
    writeJson(out / "section.json", constantsJson(data));
    CsvWriter csv(out / "chi.csv", {"S1", "S2", "chi"});
    const auto &nodes = data.section->nodes();
    for (std::size_t n = 0; n < nodes.size(); ++n) csv.row({nodes[n].x(), nodes[n].y(), data.torsion.chi(n)});
    return "section: area " + fmt(data.constants.area) + ", I1 " + fmt(data.constants.I1) + ", I2 " +
           fmt(data.constants.I2) + ", K " + fmt(data.constants.K);
}

std::string runSolve(const RunConfig &cfg, const std::string &model, const fs::path &out, int /*threads*/) {
    if (model != "nonlinear" && model != "linear" && model != "extensional" && model != "coupled")
        throw ValidationError("unknown model '" + model + "' (nonlinear, linear, extensional, coupled)");
    const Setup setup = buildSetup(cfg);
    const RodProblem problem = inContext(cfg, "/solver", [&] {
        return makeRodProblem(setup.frame, setup.section, cfg.material, cfg.intervals);
    });
    const LoadMatrix G = inContext(cfg, "/loads", [&] {
        return assembleLoadMatrix(cfg.loads, setup.frame, *setup.section.section, problem.grid);
    });
    const ReducedFunctional functional(problem, G);
    prepareOutput(out);

    json summary{{"model", model},
                 {"kappa", cfg.loads.kappa},
                 {"intervals", problem.intervals()},
                 {"frame_orientation", setup.frame->orientation()},
                 {"section", constantsJson(setup.section)}};
    std::string line;
    const auto &grid = problem.grid;

    if (model == "nonlinear") {
        const NonlinearSolution sol = solveNonlinear(problem, G, cfg.nonlinear);
        CsvWriter csv(out / "solution.csv",
                      columns({{"s3"}, vecColumns("theta"), vecColumns("V"), vecColumns("VS"), {"elastic_energy"}}));
        double cumulative = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            if (k > 0) {
                const Vec3 &a = sol.generator[k - 1];
                cumulative += 0.5 * a.dot(functional.intervalStiffness(static_cast<int>(k) - 1) * a);
            }
            std::vector<double> row{grid[k]};
            append(row, logVector(sol.rotation.values()[k]));
            append(row, sol.centerline[k]);
            append(row, sol.stretching[k]);
            row.push_back(cumulative);
            csv.row(row);
        }
        summary["energy"] = sol.energy;
        summary["elastic_energy"] = functional.elasticEnergy(sol.generator);
        summary["load_work"] = functional.loadWork(sol.generator);
        summary["residual"] = sol.residual;
        summary["iterations"] = sol.iterations;
        summary["gate"] = {{"load_norm", sol.gate.loadNorm},
                           {"threshold", sol.gate.threshold},
                           {"passed", sol.gate.passed}};
        line = "nonlinear: m2 " + fmt(sol.energy) + ", residual " + fmt(sol.residual) + ", iterations " +
               std::to_string(sol.iterations) + (sol.gate.passed ? "" : " (uniqueness gate not met)");
    } else {
        LinearSolution sol;
        if (model == "linear") sol = solveLinear(problem, G);
        else if (model == "extensional")
            sol = inContext(cfg, "/loads", [&] { return solveExtensional(problem, cfg.loads); });
        else sol = inContext(cfg, "/loads", [&] { return solveCoupled(problem, cfg.loads, G); });
        CsvWriter csv(out / "solution.csv", columns({{"s3"}, vecColumns("Rc"), vecColumns("U"), vecColumns("UE"),
                                                     vecColumns("VS"), {"elastic_energy"}}));
        double cumulative = 0.0;
        auto at = [](const std::vector<Vec3> &v, std::size_t k) { return v.empty() ? Vec3::Zero() : v[k]; };
        for (std::size_t k = 0; k < grid.size(); ++k) {
            if (k > 0 && !sol.rotation.empty()) {
                const Vec3 b = sol.rotationSlope(static_cast<int>(k) - 1);
                cumulative += 0.5 * b.dot(functional.intervalStiffness(static_cast<int>(k) - 1) * b);
            }
            std::vector<double> row{grid[k]};
            append(row, at(sol.rotation, k));
            append(row, at(sol.displacement, k));
            append(row, at(sol.extensional, k));
            append(row, at(sol.stretching, k));
            row.push_back(cumulative);
            csv.row(row);
        }
        summary["energy"] = sol.energy;
        summary["gradient_norm"] = sol.gradientNorm;
        summary["warnings"] = sol.warnings;
        line = model + ": m_kappa " + fmt(sol.energy);
        for (const auto &w : sol.warnings) line += "\nwarning: " + w;
    }
    writeJson(out / "summary.json", summary);
    return line;
}

// ---------------------------------------------------------------------------

DeformationField3D readFieldCsv(const fs::path &path, std::shared_ptr<const RodChart> chart) {
    std::ifstream in(path);
    const std::string file = path.string();
    if (!in) throw ValidationError(file + ": cannot open field file");
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(file + ":1: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "S1,S2,s3,v1,v2,v3") throw ValidationError(file + ":1: header must be S1,S2,s3,v1,v2,v3");
    const auto &nodes = chart->section().nodes();
    const std::size_t N = nodes.size();
    std::vector<double> axial;
    std::vector<Vec3> values;
    int lineNo = 1;
    while (std::getline(in, line)) {
        ++lineNo;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::array<double, 6> x{};
        std::stringstream ss(line);
        std::string cell;
        int count = 0;
        while (std::getline(ss, cell, ',')) {
            if (count >= 6) break;
            try {
                std::size_t used = 0;
                x[count] = std::stod(cell, &used);
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception &) {
                throw ValidationError(file + ":" + std::to_string(lineNo) + ": not a number: '" + cell + "'");
            }
            ++count;
        }
        if (count != 6 || ss.rdbuf()->in_avail() > 0)
            throw ValidationError(file + ":" + std::to_string(lineNo) + ": expected 6 columns");
        const std::size_t n = values.size() % N;
        if (n == 0) axial.push_back(x[2]);
        else if (x[2] != axial.back())
            throw ValidationError(file + ":" + std::to_string(lineNo) + ": s3 changes inside a section block");
        if (std::abs(x[0] - nodes[n].x()) > 1e-9 || std::abs(x[1] - nodes[n].y()) > 1e-9)
            throw ValidationError(file + ":" + std::to_string(lineNo) + ": (S1, S2) does not match section node " +
                                  std::to_string(n) + " of the configured mesh");
        values.emplace_back(x[3], x[4], x[5]);
    }
    if (values.size() % N != 0)
        throw ValidationError(file + ": incomplete last section block (" + std::to_string(values.size() % N) + " of " +
                              std::to_string(N) + " nodes)");
    try {
        return DeformationField3D(std::move(chart), std::move(axial), std::move(values));
    } catch (const ValidationError &e) {
        throw ValidationError(file + ": " + e.what());
    }
}

void writeFieldCsv(const fs::path &path, const DeformationField3D &field) {
    CsvWriter csv(path, {"S1", "S2", "s3", "v1", "v2", "v3"});
    const auto &nodes = field.chart().section().nodes();
    for (std::size_t j = 0; j < field.axial().size(); ++j)
        for (std::size_t n = 0; n < nodes.size(); ++n) {
            const Vec3 &v = field.value(static_cast<int>(n), static_cast<int>(j));
            csv.row({nodes[n].x(), nodes[n].y(), field.axial()[j], v.x(), v.y(), v.z()});
        }
}

namespace {

DeformationField3D generateField(const GeneratedField &g, std::shared_ptr<const RodChart> chart, int intervals) {
    const auto axial = uniformGrid(chart->length(), intervals);
    const double delta = chart->delta();
    const FrameField &frame = chart->frame();
    if (g.kind == "identity") return DeformationField3D::identity(chart, axial);
    if (g.kind == "rigid") {
        const Mat3 Q = expSO3(g.rotation);
        return DeformationField3D::sample(chart, axial, [&](double S1, double S2, double s3) {
            return Vec3(Q * RodChart::phi(frame.at(s3), delta * S1, delta * S2) + g.translation);
        });
    }
    // Bending R = exp(s3 hat(b)) with centerline int R t, a stretching part of
    // order delta and a zero-mean warping of order delta^2.
    const auto Rfield = integrateGenerator(axial, std::vector<Vec3>(intervals, g.bending));
    const auto V = integrateCenterline(frame, Rfield);
    const double ratio = chart->section().moment(2, 0) / chart->section().area();
    return DeformationField3D::sample(chart, axial, [&](double S1, double S2, double s3) {
        const FramePoint p = frame.at(s3);
        const Mat3 R = Rfield.evaluate(s3);
        const Vec3 stretch = delta * Vec3(0.3 * s3 * s3, -0.2 * s3, 0.25 * s3);
        const Vec3 c1(0.2, 0.1 * s3, -0.3), c2(-0.1, 0.3, 0.2 * s3), c3(0.15, -0.2, 0.1);
        const Vec3 w = S1 * c1 + S2 * c2 + (S1 * S1 - ratio) * c3;
        return Vec3(evaluateCenterline(frame, Rfield, V, s3) + stretch + R * (delta * (S1 * p.n1 + S2 * p.n2)) +
                    delta * delta * (R * w));
    });
}

} // namespace

std::string runDecompose(const RunConfig &cfg, const fs::path &out, int threads) {
    if (!cfg.decompose) throw ValidationError(cfg.source.string() + ": missing 'decompose' block");
    const DecomposeConfig &dc = *cfg.decompose;
    const Setup setup = buildSetup(cfg);
    const auto chart = inContext(cfg, "/decompose/delta", [&] {
        return std::make_shared<const RodChart>(setup.frame, setup.section.section, dc.delta);
    });
    prepareOutput(out);
    DeformationField3D field = dc.field ? readFieldCsv(*dc.field, chart)
                                        : generateField(*dc.generate, chart, dc.axialIntervals);
    if (dc.generate) writeFieldCsv(out / "field.csv", field);

    DecompositionOptions opt;
    opt.slices = dc.slices;
    opt.clampLeft = dc.clampLeft;
    opt.threads = threads;
    const auto dec = inContext(cfg, "/decompose", [&] { return decompose(field, opt); });

    {
        CsvWriter csv(out / "decomposition.csv",
                      columns({{"s3"}, vecColumns("V"), vecColumns("theta"), vecColumns("VB"), vecColumns("VS")}));
        for (std::size_t j = 0; j < dec.axial.size(); ++j) {
            std::vector<double> row{dec.axial[j]};
            append(row, dec.centerline[j]);
            append(row, logVector(dec.rotation.evaluate(dec.axial[j])));
            append(row, dec.bending[j]);
            append(row, dec.stretching[j]);
            csv.row(row);
        }
    }
    {
        CsvWriter csv(out / "samples.csv", columns({{"alpha"}, vecColumns("theta")}));
        for (std::size_t k = 0; k < dec.samples.size(); ++k) {
            std::vector<double> row{chart->length() * static_cast<double>(k) / dec.slices};
            append(row, logVector(dec.samples[k]));
            csv.row(row);
        }
    }
    double warpMax = 0.0, rotationSpread = 0.0;
    {
        CsvWriter csv(out / "warping.csv", {"S1", "S2", "s3", "w1", "w2", "w3"});
        const auto &nodes = chart->section().nodes();
        const std::size_t N = nodes.size();
        for (std::size_t j = 0; j < dec.axial.size(); ++j)
            for (std::size_t n = 0; n < N; ++n) {
                const Vec3 &w = dec.warping[j * N + n];
                warpMax = std::max(warpMax, w.norm());
                csv.row({nodes[n].x(), nodes[n].y(), dec.axial[j], w.x(), w.y(), w.z()});
            }
        for (const auto &R : dec.samples) rotationSpread = std::max(rotationSpread, (R - dec.samples[0]).norm());
    }
    const EstimateReport &e = dec.estimates;
    json summary{{"delta", dc.delta},
                 {"slices", dec.slices},
                 {"clamp_left", dc.clampLeft},
                 {"axial_nodes", dec.axial.size()},
                 {"warping_max", warpMax},
                 {"rotation_sample_spread", rotationSpread},
                 {"estimates",
                  {{"distance", e.distance},
                   {"warping", e.warping},
                   {"warping_gradient", e.warpingGradient},
                   {"rotation_derivative", e.rotationDerivative},
                   {"stretch", e.stretch},
                   {"gradient_gap", e.gradientGap}}},
                 {"ratios",
                  {{"warping_over_delta_distance", e.ratios[0]},
                   {"warping_gradient_over_distance", e.ratios[1]},
                   {"rotation_derivative_delta2_over_distance", e.ratios[2]},
                   {"stretch_delta_over_distance", e.ratios[3]},
                   {"gradient_gap_over_distance", e.ratios[4]}}}};
    writeJson(out / "summary.json", summary);
    std::ostringstream line;
    line << "decompose: " << dec.slices << " slices, max |vbar| " << fmt(warpMax) << ", dist " << fmt(e.distance)
         << ", ratios";
    for (double r : e.ratios) line << ' ' << fmt(r);
    return line.str();
}

// ---------------------------------------------------------------------------

std::string runGamma(const RunConfig &cfg, const fs::path &out, int threads) {
    const Setup setup = buildSetup(cfg);
    const RodProblem problem = inContext(cfg, "/solver", [&] {
        return makeRodProblem(setup.frame, setup.section, cfg.material, cfg.intervals);
    });
    const LoadMatrix G = inContext(cfg, "/loads", [&] {
        return assembleLoadMatrix(cfg.loads, setup.frame, *setup.section.section, problem.grid);
    });
    RecoveryData data;
    double modelEnergy = 0.0;
    if (cfg.loads.kappa == 2.0) {
        const NonlinearSolution sol = solveNonlinear(problem, G, cfg.nonlinear);
        data = nonlinearRecoveryData(problem, sol);
        modelEnergy = sol.energy;
    } else {
        const LinearSolution sol = solveLinear(problem, G);
        data = linearRecoveryData(problem, sol, cfg.loads.kappa);
        modelEnergy = sol.energy;
    }
    GammaOptions opt = cfg.gamma;
    opt.threads = threads;
    const GammaReport r =
        inContext(cfg, "/gamma", [&] { return gammaCheck(data, setup.section, cfg.material, cfg.loads, G, modelEnergy, opt); });
    prepareOutput(out);
    {
        CsvWriter csv(out / "gamma.csv", {"delta", "quotient", "gap", "tensor_gap", "distance_bound"});
        for (std::size_t i = 0; i < r.deltas.size(); ++i)
            csv.row({r.deltas[i], r.quotients[i], r.gaps[i], r.tensorGaps[i], r.distanceBounds[i]});
    }
    json summary{{"kappa", r.kappa},
                 {"requested_deltas", cfg.gamma.deltas},
                 {"deltas", r.deltas},
                 {"dropped", r.dropped},
                 {"limit_energy", r.limitEnergy},
                 {"model_energy", r.modelEnergy},
                 {"limit_tensor_norm", r.limitTensorNorm},
                 {"slope", numberOrNull(r.slope)},
                 {"tensor_slope", numberOrNull(r.tensorSlope)},
                 {"monotone", r.monotone},
                 {"tensor_monotone", r.tensorMonotone},
                 {"warnings", r.warnings}};
    writeJson(out / "gamma.json", summary);
    std::string line = "gamma: limit " + fmt(r.limitEnergy) + ", model " + fmt(r.modelEnergy) + ", slope " +
                       fmt(r.slope) + ", tensor slope " + fmt(r.tensorSlope);
    for (const auto &w : r.warnings) line += "\nwarning: " + w;
    return line;
}

} // namespace rodlimit::cli
