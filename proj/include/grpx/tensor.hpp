#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace grpx {

// Letters are 0-based internally and printed 1-based ("12" is the word (1,2)).
using Word = std::vector<int>;

std::string word_string(const Word& w);
Word parse_word(const std::string& s);
// All words of length n, in lexicographic order (index = base-d number).
std::vector<Word> words_of_length(int d, int n);
// Words of length 1..max_len, shorter first.
std::vector<Word> words_up_to(int d, int max_len);
std::size_t word_index(const Word& w, int d);
Word concat(const Word& a, const Word& b);

// Element of the truncated tensor algebra T^N(R^d); level k holds d^k coordinates.
class TensorElement {
public:
    static constexpr int max_level = 3;

    TensorElement() = default;
    TensorElement(int d, int N);  // zero element
    static TensorElement identity(int d, int N);
    // exp(v) truncated at level N: the signature of a straight segment with increment v.
    static TensorElement exp(const Eigen::VectorXd& v, int N);

    int dim() const { return d_; }
    int depth() const { return n_; }
    const std::vector<double>& level(int k) const { return lv_[static_cast<std::size_t>(k)]; }
    std::vector<double>& level(int k) { return lv_[static_cast<std::size_t>(k)]; }
    double operator[](const Word& w) const;
    double& operator[](const Word& w);
    double level_norm(int k) const;  // Euclidean norm on (R^d)^{(x)k}

    TensorElement operator*(const TensorElement& o) const;  // truncated tensor product
    TensorElement operator+(const TensorElement& o) const;
    TensorElement operator-(const TensorElement& o) const;
    TensorElement scaled(double a) const;
    // two-sided inverse when the scalar part is 1
    TensorElement inverse() const;
    double max_abs_diff(const TensorElement& o) const;

    nlohmann::json to_json() const;
    static TensorElement from_json(const nlohmann::json& j, int d, int N);

private:
    int d_ = 0, n_ = 0;
    std::vector<std::vector<double>> lv_;
};

}  // namespace grpx
