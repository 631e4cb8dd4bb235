#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"

namespace mgsse {

enum class BusKind { SyncGen, Inverter, LoadOnly, FictitiousSG, FictitiousInv };

inline const char* to_string(BusKind k) {
    switch (k) {
        case BusKind::SyncGen: return "sg";
        case BusKind::Inverter: return "inv";
        case BusKind::LoadOnly: return "load";
        case BusKind::FictitiousSG: return "fict_sg";
        case BusKind::FictitiousInv: return "fict_inv";
    }
    return "?";
}

struct BusParams {
    double M = 0.0;    // inertia, generator internal buses only
    double D = 0.0;    // damping, droop or load-frequency coefficient
    double R = 0.0;    // governor speed droop
    double tau = 0.0;  // governor time constant (s)
    double P_set = 0.0;
    double P_load = 0.0;
    double V = 1.0;
};

struct Bus {
    int id = 0;
    BusKind kind = BusKind::LoadOnly;
    BusParams p;
    int parent = 0;  // physical bus of a fictitious bus, 0 otherwise
};

// g and b are the off-diagonal entries of the nodal admittance matrix, so an
// inductive link of reactance x carries b = +1/x and phi = 0.
struct Edge {
    int i = 0, j = 0;  // i < j
    double g = 0.0, b = 0.0;
    double y_mag = 0.0, phi = 0.0;
};

struct EdgeParams {
    double y_mag;
    double phi;
};

inline EdgeParams edge_params(double g, double b) {
    if (g == 0.0 && b == 0.0) throw ModelError("edge_params: zero admittance");
    return {std::hypot(g, b), std::atan2(g, b)};
}

struct Line {
    int from = 0, to = 0;
    double r = 0.0, x = 0.0;
};

// Series impedance r + jx becomes the admittance-matrix entry -1/(r + jx).
inline Edge edge_from_line(const Line& ln) {
    const double z2 = ln.r * ln.r + ln.x * ln.x;
    if (!(z2 > 0.0)) throw ModelError("line " + std::to_string(ln.from) + "-" + std::to_string(ln.to) + ": zero impedance");
    Edge e;
    e.i = std::min(ln.from, ln.to);
    e.j = std::max(ln.from, ln.to);
    e.g = -ln.r / z2;
    e.b = ln.x / z2;
    auto ep = edge_params(e.g, e.b);
    e.y_mag = ep.y_mag;
    e.phi = ep.phi;
    return e;
}

// A physical bus before augmentation. `unit` holds the parameters of the
// generator or inverter behind it and is ignored for load-only buses.
struct BaseBus {
    int id = 0;
    BusParams bus;
    BusParams unit;
    double capacity = 1.0;
};

struct AugmentedGrid {
    std::vector<Bus> buses;  // buses[id - 1]
    std::vector<Edge> edges;
    std::vector<int> sg, inv, load, fict_sg, fict_inv;
    std::vector<std::vector<std::pair<int, int>>> adj;  // per bus index: (neighbor index, edge index)
    std::vector<int> state_row, meas_row;               // first row of each bus

    std::size_t n_bus() const { return buses.size(); }
    std::size_t n_sg() const { return fict_sg.size(); }
    std::size_t n_meas() const { return buses.size() + fict_sg.size(); }
    std::size_t n_state() const { return buses.size() + 2 * fict_sg.size(); }
    std::size_t n_edge() const { return edges.size(); }
    const Bus& bus(int id) const { return buses.at(static_cast<std::size_t>(id - 1)); }
    bool is_gen(std::size_t idx) const { return buses[idx].kind == BusKind::FictitiousSG; }

    // Row labels used in CSV headers.
    std::vector<std::string> state_labels() const {
        std::vector<std::string> out;
        for (const auto& b : buses) {
            out.push_back("theta_" + std::to_string(b.id));
            if (b.kind == BusKind::FictitiousSG) {
                out.push_back("omega_" + std::to_string(b.id));
                out.push_back("pm_" + std::to_string(b.id));
            }
        }
        return out;
    }
    std::vector<std::string> meas_labels() const {
        std::vector<std::string> out;
        for (const auto& b : buses) {
            out.push_back("theta_" + std::to_string(b.id));
            if (b.kind == BusKind::FictitiousSG) out.push_back("omega_" + std::to_string(b.id));
        }
        return out;
    }
};

namespace detail {

inline bool connected(std::size_t n, const std::vector<std::vector<std::pair<int, int>>>& adj) {
    if (n == 0) return true;
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        auto u = stack.back();
        stack.pop_back();
        for (auto [v, e] : adj[u]) {
            (void)e;
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                ++count;
                stack.push_back(static_cast<std::size_t>(v));
            }
        }
    }
    return count == n;
}

}  // namespace detail

// Physical ids must be exactly 1..P. Fictitious generator buses get ids P+1..,
// then fictitious inverter buses, each group ordered by its physical bus.
inline AugmentedGrid build_augmented(const std::vector<BaseBus>& base_buses, const std::vector<Line>& base_lines,
                                     std::vector<int> sg_ids, std::vector<int> inv_ids, double fict_reactance) {
    if (!(fict_reactance > 0.0)) throw ModelError("build_augmented: fictitious reactance must be positive");
    const int P = static_cast<int>(base_buses.size());

    std::vector<const BaseBus*> by_id(static_cast<std::size_t>(P), nullptr);
    for (const auto& b : base_buses) {
        if (b.id < 1 || b.id > P) throw ModelError("build_augmented: bus id " + std::to_string(b.id) + " outside 1.." + std::to_string(P));
        auto& slot = by_id[static_cast<std::size_t>(b.id - 1)];
        if (slot) throw ModelError("build_augmented: duplicate bus id " + std::to_string(b.id));
        slot = &b;
    }

    std::sort(sg_ids.begin(), sg_ids.end());
    std::sort(inv_ids.begin(), inv_ids.end());
    std::set<int> seen;
    for (int id : sg_ids) {
        if (id < 1 || id > P) throw ModelError("build_augmented: unknown generator bus " + std::to_string(id));
        if (!seen.insert(id).second) throw ModelError("build_augmented: duplicate generator bus " + std::to_string(id));
    }
    for (int id : inv_ids) {
        if (id < 1 || id > P) throw ModelError("build_augmented: unknown inverter bus " + std::to_string(id));
        if (!seen.insert(id).second) throw ModelError("build_augmented: bus " + std::to_string(id) + " listed as both generator and inverter, or twice");
    }

    AugmentedGrid g;
    for (int id = 1; id <= P; ++id) {
        Bus b;
        b.id = id;
        b.p = by_id[static_cast<std::size_t>(id - 1)]->bus;
        b.kind = BusKind::LoadOnly;
        g.buses.push_back(b);
    }
    for (int id : sg_ids) g.buses[static_cast<std::size_t>(id - 1)].kind = BusKind::SyncGen;
    for (int id : inv_ids) g.buses[static_cast<std::size_t>(id - 1)].kind = BusKind::Inverter;
    for (const auto& b : g.buses) {
        if (b.kind == BusKind::SyncGen) g.sg.push_back(b.id);
        else if (b.kind == BusKind::Inverter) g.inv.push_back(b.id);
        else g.load.push_back(b.id);
    }

    std::set<std::pair<int, int>> seen_lines;
    for (const auto& ln : base_lines) {
        if (ln.from < 1 || ln.from > P || ln.to < 1 || ln.to > P)
            throw ModelError("build_augmented: line " + std::to_string(ln.from) + "-" + std::to_string(ln.to) + " references unknown bus");
        if (ln.from == ln.to) throw ModelError("build_augmented: self loop at bus " + std::to_string(ln.from));
        if (!seen_lines.insert({std::min(ln.from, ln.to), std::max(ln.from, ln.to)}).second)
            throw ModelError("build_augmented: parallel line " + std::to_string(ln.from) + "-" + std::to_string(ln.to));
        g.edges.push_back(edge_from_line(ln));
    }

    std::vector<std::vector<std::pair<int, int>>> base_adj(static_cast<std::size_t>(P));
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        base_adj[static_cast<std::size_t>(g.edges[e].i - 1)].push_back({g.edges[e].j - 1, static_cast<int>(e)});
        base_adj[static_cast<std::size_t>(g.edges[e].j - 1)].push_back({g.edges[e].i - 1, static_cast<int>(e)});
    }
    if (!detail::connected(static_cast<std::size_t>(P), base_adj)) throw ModelError("build_augmented: base graph is disconnected");

    auto add_fictitious = [&](int parent, BusKind kind) {
        Bus b;
        b.id = static_cast<int>(g.buses.size()) + 1;
        b.kind = kind;
        b.p = by_id[static_cast<std::size_t>(parent - 1)]->unit;
        b.parent = parent;
        g.buses.push_back(b);
        Line link{parent, b.id, 0.0, fict_reactance};
        g.edges.push_back(edge_from_line(link));
        return b.id;
    };
    for (int id : sg_ids) g.fict_sg.push_back(add_fictitious(id, BusKind::FictitiousSG));
    for (int id : inv_ids) g.fict_inv.push_back(add_fictitious(id, BusKind::FictitiousInv));

    const std::size_t N = g.buses.size();
    g.adj.assign(N, {});
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        g.adj[static_cast<std::size_t>(g.edges[e].i - 1)].push_back({g.edges[e].j - 1, static_cast<int>(e)});
        g.adj[static_cast<std::size_t>(g.edges[e].j - 1)].push_back({g.edges[e].i - 1, static_cast<int>(e)});
    }

    int sr = 0, mr = 0;
    for (const auto& b : g.buses) {
        g.state_row.push_back(sr);
        g.meas_row.push_back(mr);
        const bool gen = b.kind == BusKind::FictitiousSG;
        sr += gen ? 3 : 1;
        mr += gen ? 2 : 1;
        if (gen) {
            require(b.p.M > 0.0, "bus " + std::to_string(b.id) + ": inertia M must be positive");
            require(b.p.tau > 0.0, "bus " + std::to_string(b.id) + ": governor tau must be positive");
        }
        require(b.p.D > 0.0, "bus " + std::to_string(b.id) + ": D must be positive");
        require(b.p.V > 0.0, "bus " + std::to_string(b.id) + ": V must be positive");
    }
    return g;
}

// Unit set-points proportional to capacity so that generation matches load.
inline void balance_setpoints(std::vector<BaseBus>& buses, const std::vector<int>& unit_ids) {
    double load = 0.0, cap = 0.0;
    for (const auto& b : buses) load += b.bus.P_load;
    std::set<int> units(unit_ids.begin(), unit_ids.end());
    for (const auto& b : buses)
        if (units.count(b.id)) {
            require(b.capacity > 0.0, "bus " + std::to_string(b.id) + ": capacity must be positive");
            cap += b.capacity;
        }
    if (cap == 0.0) return;
    for (auto& b : buses)
        if (units.count(b.id)) b.unit.P_set = load * b.capacity / cap;
}

struct CaseParams {
    double line_r = 0.0;
    double line_x = 0.5;
    double fict_x = 0.1;
    double sg_M = 10.0, sg_D = 2.0, sg_R = 9.5, sg_tau = 5.0;
    double inv_D = 0.7;
    double load_D = 0.1;
    double load_min = 0.0, load_max = 0.5;
    std::uint64_t load_seed = 7;
};

// The 33-bus radial feeder: topology of the standard test system, uniform
// line impedance, generators at 3, 6, 9 and inverters on every bus except the
// load-only set {1, 2, 14, 22, 25}.
inline AugmentedGrid ieee33(const CaseParams& cp = {}) {
    static const int topo[32][2] = {{1, 2},   {2, 3},   {3, 4},   {4, 5},   {5, 6},   {6, 7},   {7, 8},   {8, 9},
                                    {9, 10},  {10, 11}, {11, 12}, {12, 13}, {13, 14}, {14, 15}, {15, 16}, {16, 17},
                                    {17, 18}, {2, 19},  {19, 20}, {20, 21}, {21, 22}, {3, 23},  {23, 24}, {24, 25},
                                    {6, 26},  {26, 27}, {27, 28}, {28, 29}, {29, 30}, {30, 31}, {31, 32}, {32, 33}};
    const std::vector<int> sg_ids{3, 6, 9};
    const std::set<int> load_only{1, 2, 14, 22, 25};

    std::vector<int> inv_ids;
    for (int id = 1; id <= 33; ++id)
        if (!load_only.count(id) && std::find(sg_ids.begin(), sg_ids.end(), id) == sg_ids.end()) inv_ids.push_back(id);

    Rng rng(cp.load_seed);
    std::vector<BaseBus> buses;
    for (int id = 1; id <= 33; ++id) {
        BaseBus b;
        b.id = id;
        b.bus.P_load = rng.uniform(cp.load_min, cp.load_max);
        const bool is_sg = std::find(sg_ids.begin(), sg_ids.end(), id) != sg_ids.end();
        if (is_sg) {
            b.bus.D = cp.sg_D;
            b.unit.M = cp.sg_M;
            b.unit.D = cp.sg_D;
            b.unit.R = cp.sg_R;
            b.unit.tau = cp.sg_tau;
        } else if (load_only.count(id)) {
            b.bus.D = cp.load_D;
        } else {
            b.bus.D = cp.inv_D;
            b.unit.D = cp.inv_D;
        }
        buses.push_back(b);
    }
    std::vector<int> units = sg_ids;
    units.insert(units.end(), inv_ids.begin(), inv_ids.end());
    balance_setpoints(buses, units);

    std::vector<Line> lines;
    for (const auto& t : topo) lines.push_back({t[0], t[1], cp.line_r, cp.line_x});
    return build_augmented(buses, lines, sg_ids, inv_ids, cp.fict_x);
}

// Text grid description:
//
//   [buses]
//   # id kind key=value ...        kind is sg, inv or load
//   1 load D=0.1 Pd=0.2
//   3 sg D=2 Pd=0.1 M=10 unit_D=2 R=9.5 tau=5 cap=1
//   [lines]
//   # from to r x
//   1 2 0.0 0.5
//   [options]
//   fict_x = 0.1
//
// Unit set-points are balanced against the total load by capacity.
inline AugmentedGrid parse_grid(std::istream& in, const std::string& origin = "grid") {
    std::string section, raw;
    std::vector<BaseBus> buses;
    std::vector<Line> lines;
    std::vector<int> sg_ids, inv_ids;
    double fict_x = 0.1;
    int lineno = 0;
    auto fail = [&](const std::string& msg) { throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + msg); };
    auto number = [&](const std::string& s) {
        try {
            std::size_t pos = 0;
            double v = std::stod(s, &pos);
            if (pos != s.size()) fail("bad number '" + s + "'");
            return v;
        } catch (const std::logic_error&) {
            fail("bad number '" + s + "'");
        }
        return 0.0;
    };

    while (std::getline(in, raw)) {
        ++lineno;
        auto hash = raw.find('#');
        std::string text = raw.substr(0, hash);
        std::istringstream ls(text);
        std::string first;
        if (!(ls >> first)) continue;
        if (first.front() == '[') {
            if (first.back() != ']') fail("malformed section header");
            section = first.substr(1, first.size() - 2);
            if (section != "buses" && section != "lines" && section != "options") fail("unknown section '" + section + "'");
            continue;
        }
        if (section == "buses") {
            BaseBus b;
            b.id = static_cast<int>(number(first));
            std::string kind;
            if (!(ls >> kind)) fail("missing bus kind");
            if (kind == "sg") sg_ids.push_back(b.id);
            else if (kind == "inv") inv_ids.push_back(b.id);
            else if (kind != "load") fail("unknown bus kind '" + kind + "'");
            std::string tok;
            while (ls >> tok) {
                auto eq = tok.find('=');
                if (eq == std::string::npos) fail("expected key=value, got '" + tok + "'");
                std::string k = tok.substr(0, eq);
                double v = number(tok.substr(eq + 1));
                if (k == "D") b.bus.D = v;
                else if (k == "Pd") b.bus.P_load = v;
                else if (k == "V") b.bus.V = b.unit.V = v;
                else if (k == "M" && kind == "sg") b.unit.M = v;
                else if (k == "R" && kind == "sg") b.unit.R = v;
                else if (k == "tau" && kind == "sg") b.unit.tau = v;
                else if (k == "unit_D" && kind != "load") b.unit.D = v;
                else if (k == "cap" && kind != "load") b.capacity = v;
                else fail("key '" + k + "' not valid for a " + kind + " bus");
            }
            buses.push_back(b);
        } else if (section == "lines") {
            Line ln;
            std::string to, r, x, extra;
            if (!(ls >> to >> r >> x)) fail("line needs: from to r x");
            if (ls >> extra) fail("trailing tokens on line row");
            ln.from = static_cast<int>(number(first));
            ln.to = static_cast<int>(number(to));
            ln.r = number(r);
            ln.x = number(x);
            lines.push_back(ln);
        } else if (section == "options") {
            auto eq = text.find('=');
            if (eq == std::string::npos) fail("expected key = value");
            std::istringstream ks(text.substr(0, eq)), vs(text.substr(eq + 1));
            std::string k, v;
            ks >> k;
            vs >> v;
            if (k == "fict_x") fict_x = number(v);
            else fail("unknown option '" + k + "'");
        } else {
            fail("data outside of a section");
        }
    }
    if (buses.empty()) throw ConfigError(origin + ": no buses");
    std::vector<int> units = sg_ids;
    units.insert(units.end(), inv_ids.begin(), inv_ids.end());
    balance_setpoints(buses, units);
    return build_augmented(buses, lines, sg_ids, inv_ids, fict_x);
}

inline AugmentedGrid load_grid_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open grid file " + path);
    return parse_grid(in, path);
}

}  // namespace mgsse
