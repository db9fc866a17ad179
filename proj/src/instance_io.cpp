#include "pdmdp/instance_io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace pdmdp {

namespace {

// 17 significant digits round-trips any double exactly.
std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace

MdpInstance load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), e.byte);
    }

    MdpInstance inst;
    try {
        inst.n = j.at("n").get<int>();
        inst.m = j.at("m").get<int>();
        inst.gamma = j.at("gamma").get<double>();
        const auto& cost = j.at("cost");
        const auto& P = j.at("P");
        if (!cost.is_array() || static_cast<int>(cost.size()) != inst.m)
            throw ValidationError("cost must be an array of m vectors");
        if (!P.is_array() || static_cast<int>(P.size()) != inst.m)
            throw ValidationError("P must be an array of m matrices");
        inst.cost.resize(inst.m);
        inst.trans.resize(inst.m);
        for (int u = 0; u < inst.m; ++u) {
            const auto& cu = cost.at(u);
            if (static_cast<int>(cu.size()) != inst.n)
                throw ValidationError("cost[" + std::to_string(u) +
                                      "] must have n entries");
            inst.cost[u].resize(inst.n);
            for (int i = 0; i < inst.n; ++i)
                inst.cost[u][i] = cu.at(i).get<double>();

            const auto& Pu = P.at(u);
            if (static_cast<int>(Pu.size()) != inst.n)
                throw ValidationError("P[" + std::to_string(u) +
                                      "] must have n rows");
            inst.trans[u].resize(inst.n, inst.n);
            for (int i = 0; i < inst.n; ++i) {
                const auto& row = Pu.at(i);
                if (static_cast<int>(row.size()) != inst.n)
                    throw ValidationError("P[" + std::to_string(u) + "] row " +
                                          std::to_string(i) +
                                          " must have n entries");
                for (int k = 0; k < inst.n; ++k)
                    inst.trans[u](i, k) = row.at(k).get<double>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed instance file: ") +
                              e.what());
    }

    // Files are accepted at a looser row-sum tolerance than the generator
    // produces; rows beyond it are an error, never renormalized.
    inst.validate(1e-9);
    return inst;
}

void save(const MdpInstance& inst, const std::string& path) {
    inst.validate(1e-9);
    std::ostringstream out;
    out << "{\n";
    out << "  \"n\": " << inst.n << ",\n";
    out << "  \"m\": " << inst.m << ",\n";
    out << "  \"gamma\": " << fmt_double(inst.gamma) << ",\n";
    out << "  \"cost\": [\n";
    for (int u = 0; u < inst.m; ++u) {
        out << "    [";
        for (int i = 0; i < inst.n; ++i)
            out << (i ? ", " : "") << fmt_double(inst.cost[u][i]);
        out << (u + 1 < inst.m ? "],\n" : "]\n");
    }
    out << "  ],\n";
    out << "  \"P\": [\n";
    for (int u = 0; u < inst.m; ++u) {
        out << "    [\n";
        for (int i = 0; i < inst.n; ++i) {
            out << "      [";
            for (int k = 0; k < inst.n; ++k)
                out << (k ? ", " : "") << fmt_double(inst.trans[u](i, k));
            out << (i + 1 < inst.n ? "],\n" : "]\n");
        }
        out << (u + 1 < inst.m ? "    ],\n" : "    ]\n");
    }
    out << "  ]\n";
    out << "}\n";

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open " + path + " for writing");
    file << out.str();
    file.flush();
    if (!file.good()) throw IoError("write failed for " + path);
}

MdpInstance random_mdp(const GeneratorSpec& spec) {
    if (spec.n < 1 || spec.m < 1)
        throw ValidationError("generator needs n >= 1 and m >= 1");
    if (!(spec.gamma >= 0.0 && spec.gamma < 1.0))
        throw ValidationError("generator gamma must lie in [0, 1)");
    if (!(spec.sparsity > 0.0 && spec.sparsity <= 1.0))
        throw ValidationError("sparsity must lie in (0, 1]");
    if (!(spec.cost_lo <= spec.cost_hi))
        throw ValidationError("cost range is empty");

    SplitMix64 rng(spec.seed);
    MdpInstance inst;
    inst.n = spec.n;
    inst.m = spec.m;
    inst.gamma = spec.gamma;
    inst.cost.resize(spec.m);
    inst.trans.resize(spec.m);

    // Draw order is fixed: all costs first (action-major), then one row at a
    // time: n support flips, a forced index when the row came up empty, then
    // one weight per support entry in ascending column order.
    for (int u = 0; u < spec.m; ++u) {
        inst.cost[u].resize(spec.n);
        for (int i = 0; i < spec.n; ++i)
            inst.cost[u][i] =
                spec.cost_lo + (spec.cost_hi - spec.cost_lo) * rng.next_double();
    }
    for (int u = 0; u < spec.m; ++u) {
        inst.trans[u] = Mat::Zero(spec.n, spec.n);
        for (int i = 0; i < spec.n; ++i) {
            std::vector<int> support;
            for (int k = 0; k < spec.n; ++k)
                if (rng.next_double() < spec.sparsity) support.push_back(k);
            if (support.empty())
                support.push_back(static_cast<int>(rng.next_u64() %
                                                   static_cast<std::uint64_t>(
                                                       spec.n)));
            std::vector<double> w(support.size());
            double total = 0.0;
            for (std::size_t k = 0; k < support.size(); ++k) {
                w[k] = 1.0 - rng.next_double(); // (0, 1]
                total += w[k];
            }
            // normalize; the last entry absorbs the rounding residue so the
            // row sums to 1 exactly
            double partial = 0.0;
            for (std::size_t k = 0; k + 1 < support.size(); ++k) {
                const double p = w[k] / total;
                inst.trans[u](i, support[k]) = p;
                partial += p;
            }
            inst.trans[u](i, support.back()) = 1.0 - partial;
        }
    }
    inst.validate(1e-12);
    return inst;
}

} // namespace pdmdp
