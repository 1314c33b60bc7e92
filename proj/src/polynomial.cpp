#include "grpx/polynomial.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "grpx/errors.hpp"

namespace grpx {

namespace {

constexpr const char* kModule = "rde-flow";

class Parser {
public:
    Parser(const std::string& s, int vars) : s_(s), vars_(vars) {}

    Polynomial run() {
        Polynomial p = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return p;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw ConfigError(kModule, "cannot parse '" + s_ + "' at " + std::to_string(pos_) + ": " + why);
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Polynomial expr() {
        Polynomial p = term();
        for (;;) {
            if (eat('+')) p = p + term();
            else if (eat('-')) p = p - term();
            else return p;
        }
    }

    Polynomial term() {
        Polynomial p = unary();
        for (;;) {
            if (eat('*')) {
                p = p * unary();
            } else if (eat('/')) {
                const Polynomial q = unary();
                if (q.degree() > 0 || q.is_zero()) fail("division only by a non-zero constant");
                p = p.scaled(1.0 / q.terms().begin()->second);
            } else {
                return p;
            }
        }
    }

    Polynomial unary() {
        if (eat('-')) return unary().scaled(-1.0);
        if (eat('+')) return unary();
        Polynomial base = primary();
        if (eat('^')) {
            skip();
            const std::size_t b = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (b == pos_) fail("exponent must be a non-negative integer");
            const int n = std::stoi(s_.substr(b, pos_ - b));
            if (n > 32) fail("exponent too large");
            Polynomial r = Polynomial::constant(vars_, 1.0);
            for (int i = 0; i < n; ++i) r = r * base;
            return r;
        }
        return base;
    }

    Polynomial primary() {
        skip();
        if (eat('(')) {
            Polynomial p = expr();
            if (!eat(')')) fail("missing ')'");
            return p;
        }
        if (pos_ < s_.size() && s_[pos_] == 'y') {
            ++pos_;
            const std::size_t b = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (b == pos_) fail("variable needs an index");
            const int i = std::stoi(s_.substr(b, pos_ - b));
            if (i < 1 || i > vars_) fail("variable y" + std::to_string(i) + " outside y1..y" + std::to_string(vars_));
            return Polynomial::variable(vars_, i - 1);
        }
        const char* begin = s_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("expected a number, variable or '('");
        pos_ += static_cast<std::size_t>(end - begin);
        return Polynomial::constant(vars_, v);
    }

    const std::string& s_;
    int vars_;
    std::size_t pos_ = 0;
};

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

Polynomial Polynomial::constant(int vars, double c) {
    Polynomial p(vars);
    p.add_term(Exponents(static_cast<std::size_t>(vars), 0), c);
    return p;
}

Polynomial Polynomial::variable(int vars, int i) {
    Polynomial p(vars);
    Exponents e(static_cast<std::size_t>(vars), 0);
    e[static_cast<std::size_t>(i)] = 1;
    p.add_term(e, 1.0);
    return p;
}

Polynomial Polynomial::parse(const std::string& text, int vars) {
    if (vars < 1) throw ConfigError(kModule, "state dimension must be positive");
    return Parser(text, vars).run();
}

void Polynomial::add_term(const Exponents& e, double c) {
    if (c == 0.0) return;
    auto [it, fresh] = terms_.emplace(e, c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0.0) terms_.erase(it);
    }
}

int Polynomial::degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) {
        int s = 0;
        for (int k : e) s += k;
        d = std::max(d, s);
    }
    return d;
}

double Polynomial::operator()(const Eigen::VectorXd& y) const {
    double acc = 0.0;
    for (const auto& [e, c] : terms_) {
        double m = c;
        for (std::size_t i = 0; i < e.size(); ++i)
            for (int k = 0; k < e[i]; ++k) m *= y(static_cast<Eigen::Index>(i));
        acc += m;
    }
    return acc;
}

Polynomial Polynomial::derivative(int i) const {
    Polynomial p(vars_);
    const auto ii = static_cast<std::size_t>(i);
    for (const auto& [e, c] : terms_) {
        if (e[ii] == 0) continue;
        Exponents f = e;
        f[ii] -= 1;
        p.add_term(f, c * e[ii]);
    }
    return p;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    if (o.vars_ != vars_) throw DomainError(kModule, "polynomials in different variable sets");
    Polynomial p = *this;
    for (const auto& [e, c] : o.terms_) p.add_term(e, c);
    return p;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o.scaled(-1.0); }

Polynomial Polynomial::operator*(const Polynomial& o) const {
    if (o.vars_ != vars_) throw DomainError(kModule, "polynomials in different variable sets");
    Polynomial p(vars_);
    for (const auto& [a, ca] : terms_)
        for (const auto& [b, cb] : o.terms_) {
            Exponents e = a;
            for (std::size_t i = 0; i < e.size(); ++i) e[i] += b[i];
            p.add_term(e, ca * cb);
        }
    return p;
}

Polynomial Polynomial::scaled(double a) const {
    Polynomial p(vars_);
    for (const auto& [e, c] : terms_) p.add_term(e, a * c);
    return p;
}

Polynomial Polynomial::relabeled(int vars, const std::vector<int>& map) const {
    Polynomial p(vars);
    for (const auto& [e, c] : terms_) {
        Exponents f(static_cast<std::size_t>(vars), 0);
        for (std::size_t i = 0; i < e.size(); ++i) f[static_cast<std::size_t>(map[i])] += e[i];
        p.add_term(f, c);
    }
    return p;
}

std::string Polynomial::to_string() const {
    if (terms_.empty()) return "0";
    std::string s;
    // highest exponents first so that "y1" prints before "1"
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const auto& [e, c] = *it;
        std::string mono;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0) continue;
            if (!mono.empty()) mono += "*";
            mono += "y" + std::to_string(i + 1);
            if (e[i] > 1) mono += "^" + std::to_string(e[i]);
        }
        std::string piece;
        if (mono.empty()) piece = num(std::abs(c));
        else if (std::abs(c) == 1.0) piece = mono;
        else piece = num(std::abs(c)) + "*" + mono;
        if (s.empty()) s = (c < 0 ? "-" : "") + piece;
        else s += (c < 0 ? " - " : " + ") + piece;
    }
    return s;
}

CompiledPolynomial::CompiledPolynomial(const Polynomial& p) {
    for (const auto& [e, c] : p.terms()) {
        coef_.push_back(c);
        start_.push_back(factors_.size());
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e[i] > 0) factors_.push_back({static_cast<int>(i), e[i]});
    }
    start_.push_back(factors_.size());
}

double CompiledPolynomial::operator()(const Eigen::VectorXd& y) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < coef_.size(); ++k) {
        double m = coef_[k];
        for (std::size_t f = start_[k]; f < start_[k + 1]; ++f) {
            const double v = y(factors_[f].var);
            for (int q = 0; q < factors_[f].power; ++q) m *= v;
        }
        acc += m;
    }
    return acc;
}

PolyVectorField::PolyVectorField(int e) {
    if (e < 1) throw DomainError(kModule, "state dimension must be positive");
    c_.assign(static_cast<std::size_t>(e), Polynomial(e));
}

PolyVectorField::PolyVectorField(std::vector<Polynomial> comps) : c_(std::move(comps)) {
    for (const auto& p : c_)
        if (p.vars() != dim()) throw DomainError(kModule, "field components must be polynomials in y1..ye");
}

PolyVectorField PolyVectorField::parse(const std::vector<std::string>& comps, int e) {
    if (static_cast<int>(comps.size()) != e)
        throw ConfigError(kModule, "field needs " + std::to_string(e) + " components, got " +
                                       std::to_string(comps.size()));
    std::vector<Polynomial> c;
    for (const auto& s : comps) c.push_back(Polynomial::parse(s, e));
    return PolyVectorField(std::move(c));
}

bool PolyVectorField::is_zero() const {
    for (const auto& p : c_)
        if (!p.is_zero()) return false;
    return true;
}

int PolyVectorField::degree() const {
    int d = 0;
    for (const auto& p : c_) d = std::max(d, p.degree());
    return d;
}

Eigen::VectorXd PolyVectorField::operator()(const Eigen::VectorXd& y) const {
    Eigen::VectorXd out(dim());
    for (int j = 0; j < dim(); ++j) out(j) = c_[static_cast<std::size_t>(j)](y);
    return out;
}

Eigen::MatrixXd PolyVectorField::jacobian(const Eigen::VectorXd& y) const {
    Eigen::MatrixXd m(dim(), dim());
    for (int j = 0; j < dim(); ++j)
        for (int k = 0; k < dim(); ++k) m(j, k) = c_[static_cast<std::size_t>(j)].derivative(k)(y);
    return m;
}

PolyVectorField PolyVectorField::along(const PolyVectorField& w) const {
    if (w.dim() != dim()) throw DomainError(kModule, "vector fields of different dimension");
    PolyVectorField out(dim());
    for (int j = 0; j < dim(); ++j)
        for (int k = 0; k < dim(); ++k) out[j] = out[j] + c_[static_cast<std::size_t>(j)].derivative(k) * w[k];
    return out;
}

PolyVectorField PolyVectorField::operator+(const PolyVectorField& o) const {
    if (o.dim() != dim()) throw DomainError(kModule, "vector fields of different dimension");
    PolyVectorField out = *this;
    for (int j = 0; j < dim(); ++j) out[j] = out[j] + o[j];
    return out;
}

PolyVectorField PolyVectorField::operator-(const PolyVectorField& o) const { return *this + o.scaled(-1.0); }

PolyVectorField PolyVectorField::scaled(double a) const {
    PolyVectorField out = *this;
    for (auto& p : out.c_) p = p.scaled(a);
    return out;
}

std::vector<std::string> PolyVectorField::to_strings() const {
    std::vector<std::string> s;
    for (const auto& p : c_) s.push_back(p.to_string());
    return s;
}

PolyVectorField lie_bracket(const PolyVectorField& v, const PolyVectorField& w) {
    if (v.dim() != w.dim()) throw DomainError(kModule, "lie bracket of fields of different dimension");
    return w.along(v) - v.along(w);
}

CompiledField::CompiledField(const PolyVectorField& f) {
    for (int j = 0; j < f.dim(); ++j) c_.emplace_back(f[j]);
}

void CompiledField::eval(const Eigen::VectorXd& y, Eigen::VectorXd& out) const {
    out.resize(dim());
    for (int j = 0; j < dim(); ++j) out(j) = c_[static_cast<std::size_t>(j)](y);
}

Eigen::VectorXd CompiledField::operator()(const Eigen::VectorXd& y) const {
    Eigen::VectorXd out;
    eval(y, out);
    return out;
}

void VectorFields::validate() const {
    if (e < 1) throw ConfigError(kModule, "state dimension must be positive");
    if (drift.dim() != e) throw ConfigError(kModule, "drift has the wrong dimension");
    if (v.empty() || v.size() > 9) throw ConfigError(kModule, "need between 1 and 9 driving fields");
    for (const auto& f : v)
        if (f.dim() != e) throw ConfigError(kModule, "driving field has the wrong dimension");
}

VectorFields VectorFields::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("e") || !j["e"].is_number_integer())
        throw ConfigError(kModule, "fields need an integer \"e\"");
    VectorFields f;
    f.e = j["e"].get<int>();
    if (f.e < 1 || f.e > 3) throw ConfigError(kModule, "state dimension must lie in [1,3]");
    auto read = [&](const std::string& key) {
        const auto& a = j[key];
        if (!a.is_array()) throw ConfigError(kModule, key + " must be an array of strings");
        std::vector<std::string> s;
        for (const auto& x : a) {
            if (!x.is_string()) throw ConfigError(kModule, key + " must be an array of strings");
            s.push_back(x.get<std::string>());
        }
        return PolyVectorField::parse(s, f.e);
    };
    f.drift = j.contains("V0") ? read("V0") : PolyVectorField::zero(f.e);
    for (int i = 1; j.contains("V" + std::to_string(i)); ++i) f.v.push_back(read("V" + std::to_string(i)));
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (k == "e" || k == "V0") continue;
        bool ok = k.size() >= 2 && k[0] == 'V';
        if (ok) {
            try {
                const int i = std::stoi(k.substr(1));
                ok = i >= 1 && i <= f.d() && k == "V" + std::to_string(i);
            } catch (const std::exception&) {
                ok = false;
            }
        }
        if (!ok) throw ConfigError(kModule, "unexpected key '" + k + "' in fields (V1..Vd must be consecutive)");
    }
    f.validate();
    return f;
}

nlohmann::json VectorFields::to_json() const {
    nlohmann::json j = {{"e", e}, {"V0", drift.to_strings()}};
    for (int i = 0; i < d(); ++i) j["V" + std::to_string(i + 1)] = v[static_cast<std::size_t>(i)].to_strings();
    return j;
}

}  // namespace grpx
