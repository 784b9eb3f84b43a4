#include "lipsynth/nn/layers.hpp"

#include <cmath>

namespace lipsynth::nn {

Tensor MultiHeadAttention::forward(const Tensor& query, const Tensor& key,
                                   const Tensor& value) const {
    if (query.cols() != dim || key.cols() != dim || value.cols() != dim)
        throw std::runtime_error("attention: input dim mismatch");
    if (key.rows() != value.rows())
        throw std::runtime_error("attention: key/value length mismatch");
    if (key.rows() < 1) throw std::runtime_error("attention: empty key/value");

    Tensor q = wq.forward(query);
    Tensor k = wk.forward(key);
    Tensor v = wv.forward(value);

    const long dh = dim / heads;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
    std::vector<Tensor> head_outs;
    head_outs.reserve(heads);
    for (int h = 0; h < heads; ++h) {
        Tensor qh = slice_cols(q, h * dh, dh);
        Tensor kh = slice_cols(k, h * dh, dh);
        Tensor vh = slice_cols(v, h * dh, dh);
        Tensor scores = scale(matmul(qh, transpose(kh)), inv_sqrt);
        Tensor attn = softmax_rows(scores);
        head_outs.push_back(matmul(attn, vh));
    }
    Tensor merged = heads == 1 ? head_outs[0] : concat_cols(head_outs);
    return wo.forward(merged);
}

Mat positional_encoding(long length, long dim) {
    if (length < 1 || dim < 1) throw std::runtime_error("positional_encoding: T, D must be >= 1");
    if (dim % 2 != 0) throw std::runtime_error("positional_encoding: D must be even");
    Mat pe(length, dim);
    for (long t = 0; t < length; ++t) {
        for (long i = 0; i < dim / 2; ++i) {
            const double freq = std::pow(10000.0, 2.0 * static_cast<double>(i) /
                                                      static_cast<double>(dim));
            pe(t, 2 * i) = std::sin(static_cast<double>(t) / freq);
            pe(t, 2 * i + 1) = std::cos(static_cast<double>(t) / freq);
        }
    }
    return pe;
}

}  // namespace lipsynth::nn
