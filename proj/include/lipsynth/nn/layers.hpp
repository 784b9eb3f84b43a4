#pragma once

#include "lipsynth/nn/tensor.hpp"

#include <map>
#include <string>
#include <vector>

namespace lipsynth::nn {

// Ordered set of named trainable tensors. Names are dotted paths assembled
// while modules register themselves, e.g. "linguistic.map_visual.mlp.w".
class ParamSet {
public:
    void add(const std::string& name, Tensor t) {
        if (index_.count(name)) throw std::runtime_error("duplicate parameter name: " + name);
        index_[name] = items_.size();
        items_.push_back({name, std::move(t)});
    }
    size_t size() const { return items_.size(); }
    const std::pair<std::string, Tensor>& operator[](size_t i) const { return items_[i]; }
    std::pair<std::string, Tensor>& operator[](size_t i) { return items_[i]; }
    const Tensor* find(const std::string& name) const {
        auto it = index_.find(name);
        return it == index_.end() ? nullptr : &items_[it->second].second;
    }
    auto begin() { return items_.begin(); }
    auto end() { return items_.end(); }
    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

private:
    std::vector<std::pair<std::string, Tensor>> items_;
    std::map<std::string, size_t> index_;
};

// Per-forward call context: training toggles dropout, rng feeds its masks.
struct Ctx {
    bool training = false;
    Rng* rng = nullptr;
};

inline Ctx eval_ctx() { return Ctx{}; }

struct Linear {
    Tensor w;  // in x out
    Tensor b;  // 1 x out

    Linear() = default;
    Linear(long in, long out, Rng& rng)
        : w(uniform_fan_in(in, out, in, rng), true), b(Mat::Zero(1, out), true) {}

    Tensor forward(const Tensor& x) const { return add_row_broadcast(matmul(x, w), b); }
    void collect(ParamSet& ps, const std::string& prefix) const {
        ps.add(prefix + ".w", w);
        ps.add(prefix + ".b", b);
    }
    void set_identity() {
        w.value().setIdentity();
        b.value().setZero();
    }
};

struct LayerNorm {
    Tensor gamma, beta;

    LayerNorm() = default;
    explicit LayerNorm(long dim)
        : gamma(Mat::Ones(1, dim), true), beta(Mat::Zero(1, dim), true) {}

    Tensor forward(const Tensor& x) const { return layer_norm_rows(x, gamma, beta); }
    void collect(ParamSet& ps, const std::string& prefix) const {
        ps.add(prefix + ".gamma", gamma);
        ps.add(prefix + ".beta", beta);
    }
};

struct Embedding {
    Tensor table;  // K x D

    Embedding() = default;
    Embedding(long vocab, long dim, Rng& rng)
        : table(uniform_fan_in(vocab, dim, dim, rng), true) {}

    Tensor forward(const std::vector<int>& ids) const { return embedding_lookup(table, ids); }
    void collect(ParamSet& ps, const std::string& prefix) const {
        ps.add(prefix + ".table", table);
    }
};

struct Conv1d {
    Tensor w;  // (k*Cin) x Cout
    Tensor b;  // 1 x Cout
    int kernel = 1;

    Conv1d() = default;
    Conv1d(long cin, long cout, int k, Rng& rng)
        : w(uniform_fan_in(k * cin, cout, k * cin, rng), true),
          b(Mat::Zero(1, cout), true),
          kernel(k) {}

    Tensor forward(const Tensor& x) const { return conv1d_same(x, w, b, kernel); }
    void collect(ParamSet& ps, const std::string& prefix) const {
        ps.add(prefix + ".w", w);
        ps.add(prefix + ".b", b);
    }
};

// Scaled dot-product multi-head attention with output projection.
struct MultiHeadAttention {
    Linear wq, wk, wv, wo;
    int heads = 1;
    long dim = 0;

    MultiHeadAttention() = default;
    MultiHeadAttention(long d, int h, Rng& rng)
        : wq(d, d, rng), wk(d, d, rng), wv(d, d, rng), wo(d, d, rng), heads(h), dim(d) {
        if (d % h != 0) throw std::runtime_error("attention dim not divisible by heads");
    }

    // query: Tq x D, key/value: Tk x D -> Tq x D
    Tensor forward(const Tensor& query, const Tensor& key, const Tensor& value) const;

    void collect(ParamSet& ps, const std::string& prefix) const {
        wq.collect(ps, prefix + ".wq");
        wk.collect(ps, prefix + ".wk");
        wv.collect(ps, prefix + ".wv");
        wo.collect(ps, prefix + ".wo");
    }
    void set_identity() {
        wq.set_identity();
        wk.set_identity();
        wv.set_identity();
        wo.set_identity();
    }
};

// Sinusoidal table: PE[t, 2i] = sin(t / 10000^(2i/D)), PE[t, 2i+1] = cos(...).
Mat positional_encoding(long length, long dim);

}  // namespace lipsynth::nn
