#include "perihom/io.hpp"

#include "perihom/errors.hpp"

#include <cstdio>
#include <fstream>

namespace perihom {

namespace {
std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
} // namespace

std::string snapshot_csv(const ScalarField& u, const ScalarField& theta) {
    const auto& grid = *u.grid;
    std::string out = "x,y,u,theta\n";
    for (std::int32_t id = 0; id < grid.n_nodes; ++id) {
        const auto xy = grid.node_xy(id);
        out += num(xy[0]) + "," + num(xy[1]) + "," + num(u.values[id]) + "," +
               num(theta.values[id]) + "\n";
    }
    return out;
}

std::string two_scale_csv(const TwoScaleField& U) {
    const auto& idx = *U.index;
    const auto& g = *idx.cell;
    const int m = g.micro_resolution;
    std::string out = "macro_i,macro_j,micro_i,micro_j,value\n";
    for (int my = 0; my < idx.macro_y; ++my)
        for (int mx = 0; mx < idx.macro_x; ++mx)
            for (int b = 0; b <= m; ++b)
                for (int a = 0; a <= m; ++a) {
                    const auto fid = g.full_id(a, b);
                    if (fid < 0)
                        continue;
                    out += std::to_string(mx) + "," + std::to_string(my) + "," +
                           std::to_string(a) + "," + std::to_string(b) + "," +
                           num(U.at(mx, my, fid)) + "\n";
                }
    return out;
}

std::string diagnostics_jsonl(const MicroTrajectory& traj) {
    std::string out;
    for (const auto& d : traj.diagnostics) {
        out += "{\"step\":" + std::to_string(d.step) + ",\"t\":" + num(d.t) +
               ",\"u_min\":" + num(d.u_min) + ",\"u_max\":" + num(d.u_max) +
               ",\"theta_min\":" + num(d.theta_min) + ",\"theta_max\":" + num(d.theta_max) +
               ",\"u_mass\":" + num(d.u_mass) + ",\"theta_mass\":" + num(d.theta_mass) +
               ",\"residual_u\":" + num(d.residual_u) +
               ",\"residual_theta\":" + num(d.residual_theta) +
               ",\"positivity_ok\":" + (d.positivity_ok ? "true" : "false") + "}\n";
    }
    return out;
}

std::string diagnostics_jsonl(const LimitTrajectory& traj) {
    std::string out;
    for (const auto& d : traj.diagnostics) {
        out += "{\"step\":" + std::to_string(d.step) + ",\"t\":" + num(d.t) +
               ",\"u_min\":" + num(d.u_min) + ",\"u_max\":" + num(d.u_max) +
               ",\"theta_min\":" + num(d.theta_min) + ",\"theta_max\":" + num(d.theta_max) +
               ",\"u_mass\":" + num(d.u_mass) +
               ",\"mass_balance_defect\":" + num(d.mass_balance_defect) + "}\n";
    }
    return out;
}

std::string tensor_csv(const EffectiveTensor& tensor) {
    std::string out = "row,col,value\n";
    out += "0,0," + num(tensor.d_eff.a11) + "\n";
    out += "0,1," + num(tensor.d_eff.a12) + "\n";
    out += "1,0," + num(tensor.d_eff.a12) + "\n";
    out += "1,1," + num(tensor.d_eff.a22) + "\n";
    return out;
}

std::string correctors_csv(const CellGeometry& geom, const EffectiveTensor& tensor) {
    const int m = geom.micro_resolution;
    std::string out = "y1,y2,phi1,phi2\n";
    for (int b = 0; b <= m; ++b)
        for (int a = 0; a <= m; ++a) {
            const auto fid = geom.full_id(a, b);
            if (fid < 0)
                continue;
            out += num(static_cast<double>(a) / m) + "," + num(static_cast<double>(b) / m) +
                   "," + num(tensor.corrector_full[0][fid]) + "," +
                   num(tensor.corrector_full[1][fid]) + "\n";
        }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot open '" + path + "' for writing");
    out << content;
    if (!out)
        throw Error("failed writing '" + path + "'");
}

} // namespace perihom
