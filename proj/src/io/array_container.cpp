#include "lipsynth/io/array_container.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace lipsynth::io {

namespace {

constexpr char kMagic[8] = {'L', 'S', 'A', 'R', 'R', 'A', 'Y', '1'};

void put_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void put_u64(std::ostream& os, uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }

uint32_t get_u32(std::istream& is) {
    uint32_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), 4))
        throw std::runtime_error("array container: truncated file");
    return v;
}

uint64_t get_u64(std::istream& is) {
    uint64_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), 8))
        throw std::runtime_error("array container: truncated file");
    return v;
}

size_t elem_size(Dtype d) {
    switch (d) {
        case Dtype::f32: return 4;
        case Dtype::f64: return 8;
        case Dtype::i32: return 4;
    }
    throw std::runtime_error("array container: unknown dtype");
}

}  // namespace

long Array::elements() const {
    long n = 1;
    for (long d : shape) n *= d;
    return shape.empty() ? 0 : n;
}

void write_array_block(std::ostream& os, const ArrayMap& arrays) {
    put_u32(os, static_cast<uint32_t>(arrays.size()));
    for (const auto& [name, a] : arrays) {
        if (name.empty()) throw std::invalid_argument("array container: empty array name");
        const long n = a.elements();
        put_u32(os, static_cast<uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        const uint8_t dt = static_cast<uint8_t>(a.dtype);
        os.write(reinterpret_cast<const char*>(&dt), 1);
        put_u32(os, static_cast<uint32_t>(a.shape.size()));
        for (long d : a.shape) {
            if (d < 0) throw std::invalid_argument("array container: negative dimension");
            put_u64(os, static_cast<uint64_t>(d));
        }
        switch (a.dtype) {
            case Dtype::f32:
                if (static_cast<long>(a.f32.size()) != n)
                    throw std::invalid_argument("array container: payload/shape mismatch for " + name);
                os.write(reinterpret_cast<const char*>(a.f32.data()),
                         static_cast<std::streamsize>(n * 4));
                break;
            case Dtype::f64:
                if (static_cast<long>(a.f64.size()) != n)
                    throw std::invalid_argument("array container: payload/shape mismatch for " + name);
                os.write(reinterpret_cast<const char*>(a.f64.data()),
                         static_cast<std::streamsize>(n * 8));
                break;
            case Dtype::i32:
                if (static_cast<long>(a.i32.size()) != n)
                    throw std::invalid_argument("array container: payload/shape mismatch for " + name);
                os.write(reinterpret_cast<const char*>(a.i32.data()),
                         static_cast<std::streamsize>(n * 4));
                break;
        }
    }
}

ArrayMap read_array_block(std::istream& is) {
    const uint32_t count = get_u32(is);
    ArrayMap out;
    for (uint32_t i = 0; i < count; ++i) {
        const uint32_t name_len = get_u32(is);
        std::string name(name_len, '\0');
        if (!is.read(name.data(), name_len))
            throw std::runtime_error("array container: truncated file");
        uint8_t dt = 0;
        if (!is.read(reinterpret_cast<char*>(&dt), 1))
            throw std::runtime_error("array container: truncated file");
        if (dt > 2) throw std::runtime_error("array container: unknown dtype for " + name);
        Array a;
        a.dtype = static_cast<Dtype>(dt);
        const uint32_t ndim = get_u32(is);
        a.shape.resize(ndim);
        for (uint32_t d = 0; d < ndim; ++d) a.shape[d] = static_cast<long>(get_u64(is));
        const long n = a.elements();
        const auto bytes = static_cast<std::streamsize>(n * static_cast<long>(elem_size(a.dtype)));
        switch (a.dtype) {
            case Dtype::f32:
                a.f32.resize(static_cast<size_t>(n));
                if (!is.read(reinterpret_cast<char*>(a.f32.data()), bytes))
                    throw std::runtime_error("array container: truncated payload for " + name);
                break;
            case Dtype::f64:
                a.f64.resize(static_cast<size_t>(n));
                if (!is.read(reinterpret_cast<char*>(a.f64.data()), bytes))
                    throw std::runtime_error("array container: truncated payload for " + name);
                break;
            case Dtype::i32:
                a.i32.resize(static_cast<size_t>(n));
                if (!is.read(reinterpret_cast<char*>(a.i32.data()), bytes))
                    throw std::runtime_error("array container: truncated payload for " + name);
                break;
        }
        if (!out.emplace(name, std::move(a)).second)
            throw std::runtime_error("array container: duplicate array name " + name);
    }
    return out;
}

void write_arrays(const std::string& path, const ArrayMap& arrays) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw std::runtime_error("array container: cannot open for write: " + path);
        os.write(kMagic, 8);
        write_array_block(os, arrays);
        if (!os) throw std::runtime_error("array container: write failed: " + path);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("array container: rename failed: " + path);
}

ArrayMap read_arrays(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("array container: cannot open: " + path);
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("array container: bad magic in " + path);
    return read_array_block(is);
}

Array array_from_mat(const Mat& m) {
    Array a;
    a.dtype = Dtype::f64;
    a.shape = {m.rows(), m.cols()};
    a.f64.assign(m.data(), m.data() + m.size());
    return a;
}

Mat mat_from_array(const Array& a) {
    if (a.dtype != Dtype::f64 || a.shape.size() != 2)
        throw std::runtime_error("array container: expected 2-D f64 array");
    Mat m(a.shape[0], a.shape[1]);
    std::memcpy(m.data(), a.f64.data(), a.f64.size() * sizeof(double));
    return m;
}

Array array_from_doubles(const std::vector<double>& v) {
    Array a;
    a.dtype = Dtype::f64;
    a.shape = {static_cast<long>(v.size())};
    a.f64 = v;
    return a;
}

std::vector<double> doubles_from_array(const Array& a) {
    if (a.dtype != Dtype::f64 || a.shape.size() != 1)
        throw std::runtime_error("array container: expected 1-D f64 array");
    return a.f64;
}

Array array_from_ids(const std::vector<int>& v) {
    Array a;
    a.dtype = Dtype::i32;
    a.shape = {static_cast<long>(v.size())};
    a.i32.assign(v.begin(), v.end());
    return a;
}

std::vector<int> ids_from_array(const Array& a) {
    if (a.dtype != Dtype::i32 || a.shape.size() != 1)
        throw std::runtime_error("array container: expected 1-D i32 array");
    return std::vector<int>(a.i32.begin(), a.i32.end());
}

}  // namespace lipsynth::io
