#pragma once

#include "lipsynth/common.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace lipsynth::io {

// Single-file container for named arrays. Bit-exact round trip; payloads are
// little-endian row-major.
enum class Dtype : uint8_t { f32 = 0, f64 = 1, i32 = 2 };

struct Array {
    Dtype dtype = Dtype::f64;
    std::vector<long> shape;
    std::vector<float> f32;
    std::vector<double> f64;
    std::vector<int32_t> i32;

    long elements() const;
};

using ArrayMap = std::map<std::string, Array>;

void write_arrays(const std::string& path, const ArrayMap& arrays);
ArrayMap read_arrays(const std::string& path);

// Stream-level encoding (count + entries), reused by composite formats such
// as checkpoints.
void write_array_block(std::ostream& os, const ArrayMap& arrays);
ArrayMap read_array_block(std::istream& is);

Array array_from_mat(const Mat& m);
Mat mat_from_array(const Array& a);
Array array_from_doubles(const std::vector<double>& v);
std::vector<double> doubles_from_array(const Array& a);
Array array_from_ids(const std::vector<int>& v);
std::vector<int> ids_from_array(const Array& a);

}  // namespace lipsynth::io
