#include "grpx/tensor.hpp"

#include <cmath>

#include "grpx/errors.hpp"

namespace grpx {

std::string word_string(const Word& w) {
    std::string s;
    for (int l : w) s += std::to_string(l + 1);
    return s;
}

Word parse_word(const std::string& s) {
    Word w;
    for (char c : s) {
        if (c < '1' || c > '9') throw DomainError("rough-path-core", "bad word '" + s + "'");
        w.push_back(c - '1');
    }
    return w;
}

std::vector<Word> words_of_length(int d, int n) {
    std::vector<Word> out;
    if (n == 0) return {Word{}};
    for (const Word& p : words_of_length(d, n - 1))
        for (int l = 0; l < d; ++l) {
            Word w = p;
            w.push_back(l);
            out.push_back(w);
        }
    return out;
}

std::vector<Word> words_up_to(int d, int max_len) {
    std::vector<Word> out;
    for (int n = 1; n <= max_len; ++n) {
        const auto w = words_of_length(d, n);
        out.insert(out.end(), w.begin(), w.end());
    }
    return out;
}

std::size_t word_index(const Word& w, int d) {
    std::size_t i = 0;
    for (int l : w) {
        if (l < 0 || l >= d) throw DomainError("rough-path-core", "letter outside the alphabet");
        i = i * static_cast<std::size_t>(d) + static_cast<std::size_t>(l);
    }
    return i;
}

Word concat(const Word& a, const Word& b) {
    Word w = a;
    w.insert(w.end(), b.begin(), b.end());
    return w;
}

TensorElement::TensorElement(int d, int N) : d_(d), n_(N) {
    if (d < 1 || d > 9) throw DomainError("rough-path-core", "dimension must lie in [1,9]");
    if (N < 0 || N > max_level) throw DomainError("rough-path-core", "truncation level must lie in [0,3]");
    std::size_t size = 1;
    for (int k = 0; k <= N; ++k) {
        lv_.emplace_back(size, 0.0);
        size *= static_cast<std::size_t>(d);
    }
}

TensorElement TensorElement::identity(int d, int N) {
    TensorElement e(d, N);
    e.lv_[0][0] = 1.0;
    return e;
}

TensorElement TensorElement::exp(const Eigen::VectorXd& v, int N) {
    const int d = static_cast<int>(v.size());
    TensorElement e = identity(d, N);
    // level k = v^{(x)k} / k!, built from level k-1
    for (int k = 1; k <= N; ++k) {
        const auto& prev = e.lv_[static_cast<std::size_t>(k - 1)];
        auto& cur = e.lv_[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < prev.size(); ++i)
            for (int l = 0; l < d; ++l)
                cur[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(l)] = prev[i] * v(l) / k;
    }
    return e;
}

double TensorElement::operator[](const Word& w) const {
    if (static_cast<int>(w.size()) > n_) throw DomainError("rough-path-core", "word longer than truncation");
    return lv_[w.size()][word_index(w, d_)];
}

double& TensorElement::operator[](const Word& w) {
    if (static_cast<int>(w.size()) > n_) throw DomainError("rough-path-core", "word longer than truncation");
    return lv_[w.size()][word_index(w, d_)];
}

double TensorElement::level_norm(int k) const {
    double s = 0.0;
    for (double x : lv_[static_cast<std::size_t>(k)]) s += x * x;
    return std::sqrt(s);
}

TensorElement TensorElement::operator*(const TensorElement& o) const {
    if (o.d_ != d_ || o.n_ != n_) throw DomainError("rough-path-core", "tensor shapes differ");
    TensorElement r(d_, n_);
    for (int k = 0; k <= n_; ++k) {
        auto& out = r.lv_[static_cast<std::size_t>(k)];
        for (int i = 0; i <= k; ++i) {
            const auto& a = lv_[static_cast<std::size_t>(i)];
            const auto& b = o.lv_[static_cast<std::size_t>(k - i)];
            const std::size_t nb = b.size();
            for (std::size_t p = 0; p < a.size(); ++p) {
                if (a[p] == 0.0) continue;
                for (std::size_t q = 0; q < nb; ++q) out[p * nb + q] += a[p] * b[q];
            }
        }
    }
    return r;
}

TensorElement TensorElement::operator+(const TensorElement& o) const {
    if (o.d_ != d_ || o.n_ != n_) throw DomainError("rough-path-core", "tensor shapes differ");
    TensorElement r = *this;
    for (std::size_t k = 0; k < lv_.size(); ++k)
        for (std::size_t i = 0; i < lv_[k].size(); ++i) r.lv_[k][i] += o.lv_[k][i];
    return r;
}

TensorElement TensorElement::operator-(const TensorElement& o) const { return *this + o.scaled(-1.0); }

TensorElement TensorElement::scaled(double a) const {
    TensorElement r = *this;
    for (auto& l : r.lv_)
        for (double& x : l) x *= a;
    return r;
}

TensorElement TensorElement::inverse() const {
    if (std::abs(lv_[0][0] - 1.0) > 1e-12)
        throw DomainError("rough-path-core", "inverse needs scalar part 1");
    // (1 + a)^{-1} = sum_n (-a)^n, finite because a has no scalar part
    TensorElement a = *this;
    a.lv_[0][0] = 0.0;
    TensorElement term = identity(d_, n_), sum = identity(d_, n_);
    for (int n = 1; n <= n_; ++n) {
        term = term * a.scaled(-1.0);
        sum = sum + term;
    }
    return sum;
}

double TensorElement::max_abs_diff(const TensorElement& o) const {
    double m = 0.0;
    for (std::size_t k = 0; k < lv_.size(); ++k)
        for (std::size_t i = 0; i < lv_[k].size(); ++i) m = std::max(m, std::abs(lv_[k][i] - o.lv_[k][i]));
    return m;
}

nlohmann::json TensorElement::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (int k = 0; k <= n_; ++k)
        for (const Word& w : words_of_length(d_, k)) j[word_string(w)] = (*this)[w];
    return j;
}

TensorElement TensorElement::from_json(const nlohmann::json& j, int d, int N) {
    TensorElement e(d, N);
    for (auto it = j.begin(); it != j.end(); ++it) e[parse_word(it.key())] = it.value().get<double>();
    return e;
}

}  // namespace grpx
