#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "aoismpc/conic.hpp"

namespace aoismpc {
namespace {

constexpr const char* kMagic = "aoismpc-sdp";
constexpr int kVersion = 1;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_lower(std::ostream& out, const MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) out << ' ' << num(m(i, j));
    }
}

void write_vector(std::ostream& out, const VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << num(v(i));
}

const char* kind_name(VarKind k) {
    switch (k) {
        case VarKind::V: return "V";
        case VarKind::M: return "M";
        case VarKind::S: return "S";
        case VarKind::Epigraph: return "tau";
    }
    return "?";
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::string word() {
        std::string w;
        if (!(in_ >> w)) throw std::runtime_error("problem dump: unexpected end of input");
        return w;
    }
    void expect(const std::string& w) {
        const auto got = word();
        if (got != w) throw std::runtime_error("problem dump: expected '" + w + "', got '" + got + "'");
    }
    int integer() { return std::stoi(word()); }
    double real() { return std::stod(word()); }

    MatrixXd lower(int dim) {
        MatrixXd m(dim, dim);
        for (int i = 0; i < dim; ++i) {
            for (int j = 0; j <= i; ++j) {
                m(i, j) = real();
                m(j, i) = m(i, j);
            }
        }
        return m;
    }
    VectorXd vector(int n) {
        VectorXd v(n);
        for (int i = 0; i < n; ++i) v(i) = real();
        return v;
    }

private:
    std::istream& in_;
};

VarKind parse_kind(const std::string& s) {
    if (s == "V") return VarKind::V;
    if (s == "M") return VarKind::M;
    if (s == "S") return VarKind::S;
    if (s == "tau") return VarKind::Epigraph;
    throw std::runtime_error("problem dump: unknown variable kind '" + s + "'");
}

}  // namespace

void dump_problem(const ConicProblem& problem, std::ostream& out) {
    out << kMagic << ' ' << kVersion << '\n';
    out << "variables " << problem.num_vars() << '\n';
    for (const auto& v : problem.variables) {
        out << kind_name(v.kind) << ' ' << v.row << ' ' << v.col << '\n';
    }
    out << "objective";
    write_vector(out, problem.objective);
    out << '\n';
    for (const auto& b : problem.psd_blocks) {
        out << "psd " << b.name << ' ' << b.dim() << ' ' << b.terms.size() << '\n';
        out << "F0";
        write_lower(out, b.F0);
        out << '\n';
        for (const auto& [v, F] : b.terms) {
            out << "F " << v;
            write_lower(out, F);
            out << '\n';
        }
    }
    for (const auto& b : problem.soc_blocks) {
        out << "soc " << b.name << ' ' << b.dim() << ' ' << b.t_terms.size() << ' ' << b.y_terms.size() << '\n';
        out << "t0 " << num(b.t0) << '\n';
        out << "y0";
        write_vector(out, b.y0);
        out << '\n';
        for (const auto& [v, a] : b.t_terms) out << "t " << v << ' ' << num(a) << '\n';
        for (const auto& [v, a] : b.y_terms) {
            out << "y " << v;
            write_vector(out, a);
            out << '\n';
        }
    }
    for (const auto& b : problem.nonneg) {
        out << "nonneg " << b.name << ' ' << b.terms.size() << '\n';
        out << "a0 " << num(b.a0) << '\n';
        for (const auto& [v, a] : b.terms) out << "a " << v << ' ' << num(a) << '\n';
    }
    out << "end\n";
}

ConicProblem load_problem(std::istream& in) {
    Reader r(in);
    r.expect(kMagic);
    if (r.integer() != kVersion) throw std::runtime_error("problem dump: unsupported version");
    ConicProblem p;
    r.expect("variables");
    const int n = r.integer();
    p.variables.resize(static_cast<std::size_t>(n));
    for (auto& v : p.variables) {
        v.kind = parse_kind(r.word());
        v.row = r.integer();
        v.col = r.integer();
    }
    r.expect("objective");
    p.objective = r.vector(n);

    for (std::string tag = r.word(); tag != "end"; tag = r.word()) {
        if (tag == "psd") {
            LmiBlock b;
            b.name = r.word();
            const int dim = r.integer();
            const int nterms = r.integer();
            r.expect("F0");
            b.F0 = r.lower(dim);
            for (int i = 0; i < nterms; ++i) {
                r.expect("F");
                const int v = r.integer();
                b.terms.emplace_back(v, r.lower(dim));
            }
            p.psd_blocks.push_back(std::move(b));
        } else if (tag == "soc") {
            SocBlock b;
            b.name = r.word();
            const int dim = r.integer();
            const int nt = r.integer();
            const int ny = r.integer();
            r.expect("t0");
            b.t0 = r.real();
            r.expect("y0");
            b.y0 = r.vector(dim);
            for (int i = 0; i < nt; ++i) {
                r.expect("t");
                const int v = r.integer();
                b.t_terms.emplace_back(v, r.real());
            }
            for (int i = 0; i < ny; ++i) {
                r.expect("y");
                const int v = r.integer();
                b.y_terms.emplace_back(v, r.vector(dim));
            }
            p.soc_blocks.push_back(std::move(b));
        } else if (tag == "nonneg") {
            LinearInequality b;
            b.name = r.word();
            const int nterms = r.integer();
            r.expect("a0");
            b.a0 = r.real();
            for (int i = 0; i < nterms; ++i) {
                r.expect("a");
                const int v = r.integer();
                b.terms.emplace_back(v, r.real());
            }
            p.nonneg.push_back(std::move(b));
        } else {
            throw std::runtime_error("problem dump: unknown section '" + tag + "'");
        }
    }
    return p;
}

}  // namespace aoismpc
