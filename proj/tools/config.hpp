// Run configuration of the command-line tool: one JSON document per run.
//
// {
//   "geometry": {"kind": "straight" | "arc" | "helix" | "spline", "length", "radius",
//                "pitch", "center", "origin", "direction", "points",
//                "frame": "analytic" | "rotation_minimizing", "initial_normal"},
//   "section":  {"kind": "disc" | "ellipse" | "rectangle" | "polygon", "radius",
//                "semi_axes", "width", "height", "offset", "vertices", "refinement"},
//   "material": {"lambda", "mu"} or {"young", "poisson"},
//   "loads":    {"kappa", "f", "g": [{"p", "q", "coefficient"}], "ftilde"},
//   "solver":   {"intervals", "damping", "tolerance", "max_iterations"},
//   "gamma":    {"deltas", "section_order", "axial_points"},
//   "decompose": {"delta", "field" | "generate", "axial_intervals", "slices", "clamp_left"},
//   "output":   directory
// }
// Profiles are {"constant": v}, {"polynomial": [c0, c1, ...]} or
// {"table": {"s": [...], "values": [...]}}. Unknown keys are rejected.
#pragma once

#include "rodlimit/cross_section.hpp"
#include "rodlimit/energy3d.hpp"
#include "rodlimit/geometry.hpp"
#include "rodlimit/loads.hpp"
#include "rodlimit/nonlinear_model.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace rodlimit::cli {

struct GeneratedField {
    std::string kind = "identity"; // identity | rigid | synthetic
    Vec3 rotation = Vec3::Zero();  // rigid: rotation vector
    Vec3 translation = Vec3::Zero();
    Vec3 bending{0.4, -0.3, 0.5};  // synthetic: constant generator of R
};

struct DecomposeConfig {
    double delta = 0.0;
    std::optional<std::filesystem::path> field; // CSV S1,S2,s3,v1,v2,v3
    std::optional<GeneratedField> generate;
    int axialIntervals = 100; // generated fields only
    int slices = 0;           // 0: default count
    bool clampLeft = false;
};

struct RunConfig {
    std::filesystem::path source;
    CurveSpec curve;
    FrameSpec frame;
    SectionSpec section;
    Material material;
    LoadProfile loads;
    int intervals = 200;
    NonlinearOptions nonlinear;
    GammaOptions gamma;
    std::optional<DecomposeConfig> decompose;
    std::filesystem::path output = "out"; // relative paths resolve against the configuration directory
};

// Parses and validates a configuration file. Errors are ValidationErrors
// naming the file and the JSON location.
RunConfig loadConfig(const std::filesystem::path &path);
RunConfig parseConfig(const std::string &text, const std::filesystem::path &source);

} // namespace rodlimit::cli
