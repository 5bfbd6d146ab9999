#include "perihom/presets.hpp"

#include "perihom/errors.hpp"

#include <cmath>

namespace perihom {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Reaction reaction_preset(const std::string& name) {
    Reaction r;
    r.name = name;
    if (name == "none") {
        r.lipschitz = 0.0;
        return r;
    }
    if (name == "smoluchowski") {
        // s(2-s) on [0,3], linearly extended beyond so the global Lipschitz
        // constant stays 4; zero for s < 0
        r.lipschitz = 4.0;
        r.f = [](double s) {
            if (s < 0.0)
                return 0.0;
            if (s <= 3.0)
                return s * (2.0 - s);
            return -3.0 - 4.0 * (s - 3.0);
        };
        return r;
    }
    if (name == "decay") {
        r.lipschitz = 0.5;
        r.f = [](double s) { return s > 0.0 ? -0.5 * s : 0.0; };
        return r;
    }
    throw ConfigError("unknown reaction preset '" + name + "'");
}

std::vector<std::string> reaction_preset_names() { return {"none", "smoluchowski", "decay"}; }

std::function<Sym2(double, double)> coefficient_preset(const std::string& name) {
    if (name == "identity")
        return [](double, double) { return Sym2{1.0, 0.0, 1.0}; };
    if (name == "diag_2_3")
        return [](double, double) { return Sym2{2.0, 0.0, 3.0}; };
    if (name == "oscillating")
        return [](double y1, double y2) {
            const double s = 1.0 + 0.5 * std::cos(2.0 * kPi * y1) * std::cos(2.0 * kPi * y2);
            return Sym2{s, 0.0, s};
        };
    throw ConfigError("unknown coefficient preset '" + name + "'");
}

std::vector<std::string> coefficient_preset_names() {
    return {"identity", "diag_2_3", "oscillating"};
}

BoundarySource source_preset(const std::string& name) {
    BoundarySource v;
    v.name = name;
    if (name == "none")
        return v;
    if (name == "standard") {
        v.f = [](double t, double x1, double, double, double) {
            return (1.0 + x1) * (1.0 + 0.5 * std::cos(2.0 * kPi * t));
        };
        return v;
    }
    if (name == "modulated") {
        v.f = [](double t, double x1, double, double y1, double) {
            return (1.0 + x1) * (1.0 + 0.5 * std::cos(2.0 * kPi * t)) *
                   (1.0 + 0.5 * std::cos(2.0 * kPi * y1));
        };
        return v;
    }
    throw ConfigError("unknown source preset '" + name + "'");
}

std::vector<std::string> source_preset_names() { return {"none", "standard", "modulated"}; }

double default_u0(double x1, double x2) {
    return 1.0 + 0.5 * std::cos(kPi * x1) * std::cos(kPi * x2);
}

double default_theta0(double x1, double x2, double y1, double y2) {
    return default_u0(x1, x2) *
           (1.0 + 0.5 * std::cos(2.0 * kPi * y1) * std::cos(2.0 * kPi * y2)) / 1.5;
}

} // namespace perihom
