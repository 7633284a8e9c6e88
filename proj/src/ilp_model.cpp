// Explicit 0-1 formulation of the scheduling problem.
//
// Per stage s, layer slot j and candidate (a, b):
//   X[s][i][j][a][b]   layer j holds i branches with candidate (a, b)
//   Y[s][j][j'][a][b]  an earlier layer j' offers its weights to layer j (same
//                      candidate, or j' stores everything with u = v = 1)
//   Z[s][j][a][b]      layer j uses (a, b) and must store its own weights
//   V[s][j]            workspace of layer j

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "pimorch/errors.hpp"
#include "pimorch/ilp.hpp"

namespace pimorch {

IlpLayout::IlpLayout(const IlpInstance& inst) {
    std::int64_t next = 0;
    for (const auto& t : inst.stages) {
        StageDims d;
        d.n = t.stage.branches;
        d.nu = static_cast<int>(t.domains.u.size());
        d.nv = static_cast<int>(t.domains.v.size());
        const std::int64_t uv = static_cast<std::int64_t>(d.nu) * d.nv;
        const std::int64_t n = d.n;
        d.x0 = static_cast<int>(next);
        next += n * n * uv;
        d.y0 = static_cast<int>(next);
        next += n * n * uv;
        d.z0 = static_cast<int>(next);
        next += n * uv;
        d.w0 = static_cast<int>(next);
        next += n;
        if (next > std::numeric_limits<int>::max()) {
            throw ConfigError("ilp: model too large to number its variables");
        }
        dims_.push_back(d);
    }
    total_ = static_cast<int>(next);
}

int IlpLayout::x(int s, int i, int j, int a, int b) const {
    const auto& d = dims_[s];
    return d.x0 + (((i - 1) * d.n + j) * d.nu + a) * d.nv + b;
}

int IlpLayout::y(int s, int j, int jp, int a, int b) const {
    const auto& d = dims_[s];
    return d.y0 + ((j * d.n + jp) * d.nu + a) * d.nv + b;
}

int IlpLayout::z(int s, int j, int a, int b) const {
    const auto& d = dims_[s];
    return d.z0 + (j * d.nu + a) * d.nv + b;
}

int IlpLayout::vdyn(int s, int j) const { return dims_[s].w0 + j; }

namespace {

std::string tag(std::initializer_list<int> idx) {
    std::string out = "[";
    bool first = true;
    for (int i : idx) {
        if (!first) out += ",";
        out += std::to_string(i);
        first = false;
    }
    return out + "]";
}

bool has_full(const StageTable& t) { return t.domains.u.front() == 1 && t.domains.v.front() == 1; }

}  // namespace

ExplicitModel materialize(const IlpInstance& inst, std::int64_t max_terms) {
    std::int64_t estimate = 0;
    std::int64_t z_total = 0;
    std::int64_t layers_total = 0;
    for (const auto& t : inst.stages) {
        const std::int64_t n = t.stage.branches;
        const std::int64_t uv = static_cast<std::int64_t>(t.domains.u.size()) * t.domains.v.size();
        estimate += 8 * n * n * uv + 8 * n * n * uv + 10 * n * uv * n;
        z_total += n * uv;
        layers_total += n;
    }
    estimate += layers_total * (z_total + 1);
    if (estimate > max_terms) {
        throw ConfigError("ilp: explicit model needs about " + std::to_string(estimate) +
                          " nonzeros, above the limit of " + std::to_string(max_terms));
    }

    const IlpLayout L(inst);
    ExplicitModel m;
    m.vars.resize(L.size());
    const int S = static_cast<int>(inst.stages.size());

    for (int s = 0; s < S; ++s) {
        const auto& t = inst.stages[s];
        const int n = t.stage.branches;
        const int nu = static_cast<int>(t.domains.u.size());
        const int nv = static_cast<int>(t.domains.v.size());
        const std::string st = std::to_string(s + 1);

        for (int i = 1; i <= n; ++i)
            for (int j = 0; j < n; ++j)
                for (int a = 0; a < nu; ++a)
                    for (int b = 0; b < nv; ++b)
                        m.vars[L.x(s, i, j, a, b)] = {"X" + tag({s + 1, i, j, a, b}), VarType::binary, 0, 1};
        for (int j = 0; j < n; ++j) {
            for (int jp = 0; jp < n; ++jp)
                for (int a = 0; a < nu; ++a)
                    for (int b = 0; b < nv; ++b)
                        m.vars[L.y(s, j, jp, a, b)] = {"Y" + tag({s + 1, j, jp, a, b}), VarType::binary, 0, 1};
            for (int a = 0; a < nu; ++a)
                for (int b = 0; b < nv; ++b)
                    m.vars[L.z(s, j, a, b)] = {"Z" + tag({s + 1, j, a, b}), VarType::binary, 0, 1};
            m.vars[L.vdyn(s, j)] = {"V" + tag({s + 1, j}), VarType::integer, 0,
                                    static_cast<double>(inst.arch.node_cap)};
        }

        auto use_terms = [&](int j, int a, int b, double coef, std::vector<LinearTerm>& out) {
            for (int i = 1; i <= n; ++i) out.push_back({L.x(s, i, j, a, b), coef});
        };

        // Constraint 1: the branches of a layer fit the structured layout.
        for (int j = 0; j < n; ++j)
            for (int a = 0; a < nu; ++a)
                for (int b = 0; b < nv; ++b) {
                    LinearConstraint r{"C1[" + st + "]", {}, Sense::le,
                                       static_cast<double>(t.at(a, b).packing)};
                    for (int i = 1; i <= n; ++i) r.terms.push_back({L.x(s, i, j, a, b), double(i)});
                    m.rows.push_back(std::move(r));
                }

        // Constraint 2: all branches of the stage are scheduled.
        {
            LinearConstraint r{"C2[" + st + "]", {}, Sense::eq, static_cast<double>(n)};
            for (int i = 1; i <= n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int a = 0; a < nu; ++a)
                        for (int b = 0; b < nv; ++b) r.terms.push_back({L.x(s, i, j, a, b), double(i)});
            m.rows.push_back(std::move(r));
        }

        // Constraint 3: one count and one candidate per layer; trailing layers may stay empty.
        for (int j = 0; j < n; ++j) {
            LinearConstraint r{"C3[" + st + "]", {}, Sense::le, 1};
            for (int a = 0; a < nu; ++a)
                for (int b = 0; b < nv; ++b) use_terms(j, a, b, 1, r.terms);
            m.rows.push_back(std::move(r));
        }

        // Constraint 4: non-increasing branch counts.
        for (int j = 1; j < n; ++j) {
            LinearConstraint r{"C4[" + st + "]", {}, Sense::le, 0};
            for (int i = 1; i <= n; ++i)
                for (int a = 0; a < nu; ++a)
                    for (int b = 0; b < nv; ++b) {
                        r.terms.push_back({L.x(s, i, j, a, b), double(i)});
                        r.terms.push_back({L.x(s, i, j - 1, a, b), -double(i)});
                    }
            m.rows.push_back(std::move(r));
        }

        // Reuse indicators.
        const bool full = has_full(t);
        for (int j = 0; j < n; ++j)
            for (int jp = 0; jp < n; ++jp)
                for (int a = 0; a < nu; ++a)
                    for (int b = 0; b < nv; ++b) {
                        const int y = L.y(s, j, jp, a, b);
                        if (jp >= j || !inst.options.reuse) {
                            m.rows.push_back({"Yfix[" + st + "]", {{y, 1}}, Sense::eq, 0});
                            continue;
                        }
                        const bool self_full = full && a == 0 && b == 0;
                        LinearConstraint up{"Yor[" + st + "]", {{y, 1}}, Sense::le, 0};
                        use_terms(jp, a, b, -1, up.terms);
                        if (full && !self_full) use_terms(jp, 0, 0, -1, up.terms);
                        m.rows.push_back(std::move(up));

                        LinearConstraint same{"Ysame[" + st + "]", {{y, 1}}, Sense::ge, 0};
                        use_terms(jp, a, b, -1, same.terms);
                        m.rows.push_back(std::move(same));

                        if (full && !self_full) {
                            LinearConstraint all{"Yfull[" + st + "]", {{y, 1}}, Sense::ge, 0};
                            use_terms(jp, 0, 0, -1, all.terms);
                            m.rows.push_back(std::move(all));
                        }
                    }

        // Z = uses (a, b) and no earlier layer offers reuse.
        for (int j = 0; j < n; ++j)
            for (int a = 0; a < nu; ++a)
                for (int b = 0; b < nv; ++b) {
                    const int z = L.z(s, j, a, b);
                    LinearConstraint up{"Zuse[" + st + "]", {{z, 1}}, Sense::le, 0};
                    use_terms(j, a, b, -1, up.terms);
                    m.rows.push_back(std::move(up));
                    for (int jp = 0; jp < j; ++jp) {
                        m.rows.push_back({"Zreuse[" + st + "]", {{z, 1}, {L.y(s, j, jp, a, b), 1}}, Sense::le, 1});
                    }
                    LinearConstraint lo{"Zpay[" + st + "]", {{z, 1}}, Sense::ge, 0};
                    use_terms(j, a, b, -1, lo.terms);
                    for (int jp = 0; jp < j; ++jp) lo.terms.push_back({L.y(s, j, jp, a, b), 1});
                    m.rows.push_back(std::move(lo));
                }

        // Workspace of each layer covers every phase of its candidate.
        for (int j = 0; j < n; ++j)
            for (int ph = 0; ph < 10; ++ph) {
                LinearConstraint r{"Vdyn[" + st + "]", {{L.vdyn(s, j), 1}}, Sense::ge, 0};
                for (int a = 0; a < nu; ++a)
                    for (int b = 0; b < nv; ++b) {
                        const double w = static_cast<double>(t.at(a, b).phase_workspace[ph]);
                        if (w != 0) use_terms(j, a, b, -w, r.terms);
                    }
                m.rows.push_back(std::move(r));
            }

        for (int i = 1; i <= n; ++i)
            for (int j = 0; j < n; ++j)
                for (int a = 0; a < nu; ++a)
                    for (int b = 0; b < nv; ++b) {
                        const double c = static_cast<double>(t.at(a, b).layer_cycles);
                        if (c != 0) m.objective.push_back({L.x(s, i, j, a, b), c});
                    }
    }

    // Constraint 5: all stored weights plus the workspace of any one layer.
    std::vector<LinearTerm> weights;
    for (int s = 0; s < S; ++s) {
        const auto& t = inst.stages[s];
        for (int j = 0; j < t.stage.branches; ++j)
            for (int a = 0; a < static_cast<int>(t.domains.u.size()); ++a)
                for (int b = 0; b < static_cast<int>(t.domains.v.size()); ++b) {
                    const auto& e = t.at(a, b);
                    const double w = t.stage.blocks * e.block_weight + e.pm_weight;
                    if (w != 0) weights.push_back({L.z(s, j, a, b), w});
                }
    }
    for (int s = 0; s < S; ++s) {
        for (int j = 0; j < inst.stages[s].stage.branches; ++j) {
            LinearConstraint r{"C5", weights, Sense::le, static_cast<double>(inst.arch.node_cap)};
            r.terms.push_back({L.vdyn(s, j), 1});
            m.rows.push_back(std::move(r));
        }
    }
    return m;
}

std::int64_t ExplicitModel::binary_count() const {
    std::int64_t n = 0;
    for (const auto& v : vars) n += v.type == VarType::binary;
    return n;
}

std::int64_t ExplicitModel::integer_count() const {
    std::int64_t n = 0;
    for (const auto& v : vars) n += v.type == VarType::integer;
    return n;
}

double ExplicitModel::objective_value(const std::vector<double>& x) const {
    double total = 0;
    for (const auto& t : objective) total += t.coef * x[t.var];
    return total;
}

std::vector<std::string> ExplicitModel::violations(const std::vector<double>& x, double tol) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        const auto& v = vars[i];
        if (x[i] < v.lb - tol || x[i] > v.ub + tol) out.push_back("bounds " + v.name);
        if (std::abs(x[i] - std::round(x[i])) > tol) out.push_back("integrality " + v.name);
    }
    for (const auto& r : rows) {
        double lhs = 0;
        double scale = std::max(1.0, std::abs(r.rhs));
        for (const auto& t : r.terms) lhs += t.coef * x[t.var];
        const double eps = tol * scale;
        bool ok = true;
        switch (r.sense) {
            case Sense::le: ok = lhs <= r.rhs + eps; break;
            case Sense::ge: ok = lhs >= r.rhs - eps; break;
            case Sense::eq: ok = std::abs(lhs - r.rhs) <= eps; break;
        }
        if (!ok) out.push_back(r.family);
    }
    return out;
}

void ExplicitModel::write_lp(std::ostream& os) const {
    auto name = [&](int v) {
        std::string n = vars[v].name;
        for (char& c : n) {
            if (c == '[' || c == ']' || c == ',') c = '_';
        }
        return n;
    };
    auto terms = [&](const std::vector<LinearTerm>& ts) {
        int k = 0;
        for (const auto& t : ts) {
            os << (t.coef < 0 ? " - " : " + ") << std::abs(t.coef) << ' ' << name(t.var);
            if (++k % 8 == 0) os << "\n   ";
        }
        if (ts.empty()) os << " 0 " << name(0);
    };
    os.precision(17);
    os << "\\ scheduling model\nMinimize\n obj:";
    terms(objective);
    os << "\nSubject To\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::string fam = rows[i].family;
        for (char& c : fam) {
            if (c == '[' || c == ']') c = '_';
        }
        os << ' ' << fam << 'r' << i << ':';
        terms(rows[i].terms);
        os << (rows[i].sense == Sense::le ? " <= " : rows[i].sense == Sense::ge ? " >= " : " = ")
           << rows[i].rhs << '\n';
    }
    os << "Bounds\n";
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (vars[i].type == VarType::integer) {
            os << ' ' << vars[i].lb << " <= " << name(static_cast<int>(i)) << " <= " << vars[i].ub << '\n';
        }
    }
    os << "Generals\n";
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (vars[i].type == VarType::integer) os << ' ' << name(static_cast<int>(i)) << '\n';
    }
    os << "Binaries\n";
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (vars[i].type == VarType::binary) os << ' ' << name(static_cast<int>(i)) << '\n';
    }
    os << "End\n";
}

std::vector<double> assignment(const IlpInstance& inst, const Schedule& schedule) {
    const IlpLayout L(inst);
    std::vector<double> x(L.size(), 0.0);
    if (schedule.stages.size() != inst.stages.size()) {
        throw ValidationError("schedule: stage count does not match the model");
    }
    for (std::size_t si = 0; si < inst.stages.size(); ++si) {
        const int s = static_cast<int>(si);
        const auto& t = inst.stages[si];
        const auto& ls = schedule.stages[si].layers;
        const int n = t.stage.branches;
        const int nu = static_cast<int>(t.domains.u.size());
        const int nv = static_cast<int>(t.domains.v.size());
        if (static_cast<int>(ls.size()) > n) {
            throw ValidationError("schedule: stage " + std::to_string(s + 1) + " has more layers than branches");
        }
        std::vector<int> ua(n, -1), ub(n, -1);
        for (int j = 0; j < static_cast<int>(ls.size()); ++j) {
            const auto& l = ls[j];
            if (l.choice.count <= 0) continue;
            if (l.alpha < 0 || l.beta < 0 || l.choice.count > n) {
                throw ValidationError("schedule: stage " + std::to_string(s + 1) + " layer " +
                                      std::to_string(j) + " cannot be encoded");
            }
            x[L.x(s, l.choice.count, j, l.alpha, l.beta)] = 1;
            ua[j] = l.alpha;
            ub[j] = l.beta;
            x[L.vdyn(s, j)] = static_cast<double>(t.at(l.alpha, l.beta).workspace);
        }
        const bool full = has_full(t);
        for (int j = 0; j < n; ++j)
            for (int a = 0; a < nu; ++a)
                for (int b = 0; b < nv; ++b) {
                    bool offered = false;
                    for (int jp = 0; jp < j && inst.options.reuse; ++jp) {
                        const bool same = ua[jp] == a && ub[jp] == b;
                        const bool all = full && ua[jp] == 0 && ub[jp] == 0;
                        if (same || all) {
                            x[L.y(s, j, jp, a, b)] = 1;
                            offered = true;
                        }
                    }
                    if (ua[j] == a && ub[j] == b && !offered) x[L.z(s, j, a, b)] = 1;
                }
    }
    return x;
}

}  // namespace pimorch
