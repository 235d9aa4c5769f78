#include "config.hpp"

#include "rodlimit/error.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace rodlimit::cli {

namespace {

using nlohmann::json;

// Parsing context: the file name and the JSON pointer of the current node.
struct Node {
    const json &value;
    std::string pointer;
    const std::string &file;

    [[noreturn]] void fail(const std::string &message) const {
        throw ValidationError(file + ": " + (pointer.empty() ? "/" : pointer) + ": " + message);
    }
    Node child(const std::string &key) const { return {value.at(key), pointer + "/" + key, file}; }
    Node item(std::size_t i) const { return {value.at(i), pointer + "/" + std::to_string(i), file}; }
    bool has(const std::string &key) const { return value.contains(key); }

    void requireObject(const std::set<std::string> &allowed) const {
        if (!value.is_object()) fail("expected an object");
        for (auto it = value.begin(); it != value.end(); ++it)
            if (!allowed.count(it.key())) fail("unknown key '" + it.key() + "'");
    }
    double number() const {
        if (!value.is_number()) fail("expected a number");
        return value.get<double>();
    }
    int integer() const {
        if (!value.is_number_integer()) fail("expected an integer");
        return value.get<int>();
    }
    bool boolean() const {
        if (!value.is_boolean()) fail("expected true or false");
        return value.get<bool>();
    }
    std::string string() const {
        if (!value.is_string()) fail("expected a string");
        return value.get<std::string>();
    }
    std::size_t arraySize() const {
        if (!value.is_array()) fail("expected an array");
        return value.size();
    }
    Vec3 vec3() const {
        if (arraySize() != 3) fail("expected an array of 3 numbers");
        return Vec3(item(0).number(), item(1).number(), item(2).number());
    }
    Vec2 vec2() const {
        if (arraySize() != 2) fail("expected an array of 2 numbers");
        return Vec2(item(0).number(), item(1).number());
    }
    std::vector<double> numbers() const {
        std::vector<double> out;
        for (std::size_t i = 0; i < arraySize(); ++i) out.push_back(item(i).number());
        return out;
    }
};

// Runs `fn`, prefixing module validation errors with the node location.
template <class Fn> auto withContext(const Node &n, Fn &&fn) {
    try {
        return fn();
    } catch (const ValidationError &e) {
        const std::string what = e.what();
        if (what.rfind(n.file + ":", 0) == 0) throw;
        n.fail(what);
    }
}

template <class T> T element(const Node &n);
template <> Vec3 element<Vec3>(const Node &n) { return n.vec3(); }
template <> double element<double>(const Node &n) { return n.number(); }

template <class T> Profile<T> parseProfile(const Node &n) {
    n.requireObject({"constant", "polynomial", "table"});
    if (n.value.size() != 1) n.fail("give exactly one of 'constant', 'polynomial' or 'table'");
    if (n.has("constant")) return Profile<T>::polynomial({element<T>(n.child("constant"))});
    if (n.has("polynomial")) {
        const Node p = n.child("polynomial");
        std::vector<T> c;
        for (std::size_t i = 0; i < p.arraySize(); ++i) c.push_back(element<T>(p.item(i)));
        return withContext(p, [&] { return Profile<T>::polynomial(std::move(c)); });
    }
    const Node t = n.child("table");
    t.requireObject({"s", "values"});
    if (!t.has("s") || !t.has("values")) t.fail("a table needs 's' and 'values'");
    const auto s = t.child("s").numbers();
    const Node v = t.child("values");
    std::vector<T> values;
    for (std::size_t i = 0; i < v.arraySize(); ++i) values.push_back(element<T>(v.item(i)));
    return withContext(t, [&] { return Profile<T>::table(s, std::move(values)); });
}

void parseGeometry(const Node &n, RunConfig &cfg) {
    n.requireObject({"kind", "length", "radius", "pitch", "center", "origin", "direction", "points", "frame",
                     "initial_normal", "frame_intervals"});
    if (!n.has("kind")) n.fail("missing 'kind'");
    const std::string kind = n.child("kind").string();
    CurveSpec &c = cfg.curve;
    if (kind == "straight") c.kind = CurveKind::Straight;
    else if (kind == "arc") c.kind = CurveKind::CircularArc;
    else if (kind == "helix") c.kind = CurveKind::Helix;
    else if (kind == "spline") c.kind = CurveKind::SampledSpline;
    else n.child("kind").fail("unknown curve kind '" + kind + "' (straight, arc, helix, spline)");
    if (n.has("length")) c.length = n.child("length").number();
    if (n.has("radius")) c.radius = n.child("radius").number();
    if (n.has("pitch")) c.pitchParameter = n.child("pitch").number();
    if (n.has("center")) c.center = n.child("center").vec3();
    if (n.has("origin")) c.origin = n.child("origin").vec3();
    if (n.has("direction")) c.direction = n.child("direction").vec3();
    if (n.has("points")) {
        const Node p = n.child("points");
        for (std::size_t i = 0; i < p.arraySize(); ++i) c.points.push_back(p.item(i).vec3());
    }
    if (n.has("frame")) {
        const std::string f = n.child("frame").string();
        if (f == "analytic") cfg.frame.method = FrameMethod::Analytic;
        else if (f == "rotation_minimizing") cfg.frame.method = FrameMethod::RotationMinimizing;
        else n.child("frame").fail("unknown frame method '" + f + "' (analytic, rotation_minimizing)");
    }
    if (n.has("initial_normal")) cfg.frame.initialNormal = n.child("initial_normal").vec3();
    if (n.has("frame_intervals")) cfg.frame.rotationMinimizingIntervals = n.child("frame_intervals").integer();
}

void parseSection(const Node &n, RunConfig &cfg) {
    n.requireObject({"kind", "radius", "semi_axes", "width", "height", "offset", "vertices", "refinement"});
    if (!n.has("kind")) n.fail("missing 'kind'");
    const std::string kind = n.child("kind").string();
    SectionSpec &s = cfg.section;
    if (kind == "disc") s.kind = SectionKind::Disc;
    else if (kind == "ellipse") s.kind = SectionKind::Ellipse;
    else if (kind == "rectangle") s.kind = SectionKind::Rectangle;
    else if (kind == "polygon") s.kind = SectionKind::Polygon;
    else n.child("kind").fail("unknown section kind '" + kind + "' (disc, ellipse, rectangle, polygon)");
    if (n.has("radius")) s.radius = n.child("radius").number();
    if (n.has("semi_axes")) {
        const Vec2 ab = n.child("semi_axes").vec2();
        s.semiAxisA = ab.x();
        s.semiAxisB = ab.y();
    }
    if (n.has("width")) s.width = n.child("width").number();
    if (n.has("height")) s.height = n.child("height").number();
    if (n.has("offset")) s.offset = n.child("offset").vec2();
    if (n.has("vertices")) {
        const Node v = n.child("vertices");
        for (std::size_t i = 0; i < v.arraySize(); ++i) s.vertices.push_back(v.item(i).vec2());
    }
    if (n.has("refinement")) s.refinementLevel = n.child("refinement").integer();
}

void parseMaterial(const Node &n, RunConfig &cfg) {
    n.requireObject({"lambda", "mu", "young", "poisson"});
    const bool lame = n.has("lambda") || n.has("mu");
    const bool engineering = n.has("young") || n.has("poisson");
    if (lame == engineering)
        n.fail("give exactly one parameterization: {lambda, mu} or {young, poisson}");
    if (lame) {
        if (!n.has("lambda") || !n.has("mu")) n.fail("both 'lambda' and 'mu' are required");
        const double l = n.child("lambda").number(), m = n.child("mu").number();
        cfg.material = withContext(n, [&] { return Material::fromLame(l, m); });
    } else {
        if (!n.has("young") || !n.has("poisson")) n.fail("both 'young' and 'poisson' are required");
        const double E = n.child("young").number(), nu = n.child("poisson").number();
        cfg.material = withContext(n, [&] { return Material::fromYoungPoisson(E, nu); });
    }
}

void parseLoads(const Node &n, RunConfig &cfg) {
    n.requireObject({"kappa", "f", "g", "ftilde"});
    LoadProfile &l = cfg.loads;
    if (n.has("kappa")) l.kappa = n.child("kappa").number();
    if (l.kappa < 2.0) n.child("kappa").fail("kappa must be at least 2");
    if (n.has("f")) l.f = parseProfile<Vec3>(n.child("f"));
    if (n.has("g")) {
        const Node g = n.child("g");
        for (std::size_t i = 0; i < g.arraySize(); ++i) {
            const Node term = g.item(i);
            term.requireObject({"p", "q", "coefficient"});
            if (!term.has("p") || !term.has("q") || !term.has("coefficient"))
                term.fail("a section load term needs 'p', 'q' and 'coefficient'");
            SectionLoadTerm t;
            t.p = term.child("p").integer();
            t.q = term.child("q").integer();
            if (t.p < 0 || t.q < 0) term.fail("exponents must be nonnegative");
            t.coefficient = parseProfile<Vec3>(term.child("coefficient"));
            l.g.push_back(std::move(t));
        }
    }
    if (n.has("ftilde")) l.ftilde = parseProfile<double>(n.child("ftilde"));
}

void parseSolver(const Node &n, RunConfig &cfg) {
    n.requireObject({"intervals", "damping", "tolerance", "max_iterations"});
    if (n.has("intervals")) cfg.intervals = n.child("intervals").integer();
    if (cfg.intervals < 1) n.fail("'intervals' must be positive");
    if (n.has("damping")) cfg.nonlinear.damping = n.child("damping").number();
    if (n.has("tolerance")) cfg.nonlinear.tolerance = n.child("tolerance").number();
    if (n.has("max_iterations")) cfg.nonlinear.maxIterations = n.child("max_iterations").integer();
}

void parseGamma(const Node &n, RunConfig &cfg) {
    n.requireObject({"deltas", "section_order", "axial_points"});
    if (n.has("deltas")) cfg.gamma.deltas = n.child("deltas").numbers();
    if (n.has("section_order")) cfg.gamma.sectionOrder = n.child("section_order").integer();
    if (n.has("axial_points")) cfg.gamma.axialPoints = n.child("axial_points").integer();
}

void parseDecompose(const Node &n, RunConfig &cfg) {
    n.requireObject({"delta", "field", "generate", "axial_intervals", "slices", "clamp_left"});
    DecomposeConfig d;
    if (!n.has("delta")) n.fail("missing 'delta'");
    d.delta = n.child("delta").number();
    if (n.has("field") == n.has("generate")) n.fail("give exactly one of 'field' (CSV path) or 'generate'");
    if (n.has("field")) {
        std::filesystem::path p = n.child("field").string();
        if (p.is_relative()) p = cfg.source.parent_path() / p;
        if (!std::filesystem::exists(p)) n.child("field").fail("file not found: " + p.string());
        d.field = p;
    } else {
        const Node g = n.child("generate");
        g.requireObject({"kind", "rotation", "translation", "bending"});
        GeneratedField gen;
        if (g.has("kind")) gen.kind = g.child("kind").string();
        if (gen.kind != "identity" && gen.kind != "rigid" && gen.kind != "synthetic")
            g.child("kind").fail("unknown generated field '" + gen.kind + "' (identity, rigid, synthetic)");
        if (g.has("rotation")) gen.rotation = g.child("rotation").vec3();
        if (g.has("translation")) gen.translation = g.child("translation").vec3();
        if (g.has("bending")) gen.bending = g.child("bending").vec3();
        d.generate = gen;
    }
    if (n.has("axial_intervals")) d.axialIntervals = n.child("axial_intervals").integer();
    if (d.axialIntervals < 1) n.fail("'axial_intervals' must be positive");
    if (n.has("slices")) d.slices = n.child("slices").integer();
    if (d.slices < 0) n.fail("'slices' must be nonnegative");
    if (n.has("clamp_left")) d.clampLeft = n.child("clamp_left").boolean();
    cfg.decompose = d;
}

} // namespace

RunConfig parseConfig(const std::string &text, const std::filesystem::path &source) {
    const std::string file = source.string();
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ValidationError(file + ": invalid JSON: " + e.what());
    }
    RunConfig cfg;
    cfg.source = source;
    const Node root{doc, "", file};
    root.requireObject({"geometry", "section", "material", "loads", "solver", "gamma", "decompose", "output"});
    if (!root.has("geometry")) root.fail("missing 'geometry'");
    if (!root.has("section")) root.fail("missing 'section'");
    if (!root.has("material")) root.fail("missing 'material'");
    parseGeometry(root.child("geometry"), cfg);
    parseSection(root.child("section"), cfg);
    parseMaterial(root.child("material"), cfg);
    if (root.has("loads")) parseLoads(root.child("loads"), cfg);
    if (root.has("solver")) parseSolver(root.child("solver"), cfg);
    if (root.has("gamma")) parseGamma(root.child("gamma"), cfg);
    if (root.has("decompose")) parseDecompose(root.child("decompose"), cfg);
    std::filesystem::path out = root.has("output") ? root.child("output").string() : "out";
    if (out.is_relative()) out = source.parent_path() / out;
    cfg.output = out;
    return cfg;
}

RunConfig loadConfig(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path.string() + ": cannot open configuration file");
    std::ostringstream text;
    text << in.rdbuf();
    return parseConfig(text.str(), path);
}

} // namespace rodlimit::cli
