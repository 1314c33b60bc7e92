#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace grpx {

// Multivariate polynomial in y1..ye, stored as exponent vector -> coefficient.
class Polynomial {
public:
    using Exponents = std::vector<int>;

    Polynomial() = default;
    explicit Polynomial(int vars) : vars_(vars) {}
    static Polynomial constant(int vars, double c);
    static Polynomial variable(int vars, int i);  // y_{i+1}
    // Grammar: sums and products of numbers, y1..ye, parentheses, '^' non-negative
    // integer powers, and division by constant sub-expressions ("1/2*y1").
    static Polynomial parse(const std::string& text, int vars);

    int vars() const { return vars_; }
    const std::map<Exponents, double>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int degree() const;

    double operator()(const Eigen::VectorXd& y) const;
    Polynomial derivative(int i) const;

    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial scaled(double a) const;
    // Embeds into a larger variable set; variable i goes to map[i].
    Polynomial relabeled(int vars, const std::vector<int>& map) const;

    std::string to_string() const;

private:
    void add_term(const Exponents& e, double c);
    int vars_ = 0;
    std::map<Exponents, double> terms_;
};

// Flattened form for repeated evaluation.
class CompiledPolynomial {
public:
    CompiledPolynomial() = default;
    explicit CompiledPolynomial(const Polynomial& p);
    double operator()(const Eigen::VectorXd& y) const;

private:
    struct Factor {
        int var, power;
    };
    std::vector<double> coef_;
    std::vector<std::size_t> start_;  // factors of term k are [start_[k], start_[k+1])
    std::vector<Factor> factors_;
};

// Polynomial vector field on R^e.
class PolyVectorField {
public:
    PolyVectorField() = default;
    explicit PolyVectorField(int e);
    explicit PolyVectorField(std::vector<Polynomial> comps);
    static PolyVectorField parse(const std::vector<std::string>& comps, int e);
    static PolyVectorField zero(int e) { return PolyVectorField(e); }

    int dim() const { return static_cast<int>(c_.size()); }
    const Polynomial& operator[](int j) const { return c_[static_cast<std::size_t>(j)]; }
    Polynomial& operator[](int j) { return c_[static_cast<std::size_t>(j)]; }
    bool is_zero() const;
    int degree() const;

    Eigen::VectorXd operator()(const Eigen::VectorXd& y) const;
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& y) const;  // (j,k) = d_k V^j

    // (W . grad) V, i.e. DV . W
    PolyVectorField along(const PolyVectorField& w) const;
    PolyVectorField operator+(const PolyVectorField& o) const;
    PolyVectorField operator-(const PolyVectorField& o) const;
    PolyVectorField scaled(double a) const;

    std::vector<std::string> to_strings() const;

private:
    std::vector<Polynomial> c_;
};

// [V,W] = DW.V - DV.W
PolyVectorField lie_bracket(const PolyVectorField& v, const PolyVectorField& w);

class CompiledField {
public:
    CompiledField() = default;
    explicit CompiledField(const PolyVectorField& f);
    int dim() const { return static_cast<int>(c_.size()); }
    void eval(const Eigen::VectorXd& y, Eigen::VectorXd& out) const;
    Eigen::VectorXd operator()(const Eigen::VectorXd& y) const;

private:
    std::vector<CompiledPolynomial> c_;
};

// V_0 (drift) and V_1..V_d on R^e.
struct VectorFields {
    int e = 0;
    PolyVectorField drift;
    std::vector<PolyVectorField> v;

    int d() const { return static_cast<int>(v.size()); }
    void validate() const;
    // {"e":2,"V1":["1","0"],"V0":["0","y1"]}; V0 defaults to zero, V1..Vd must be consecutive.
    static VectorFields from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

}  // namespace grpx
