#include "lipsynth/train/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lipsynth::train {

namespace {

constexpr char kMagic[8] = {'L', 'S', 'C', 'K', 'P', 'T', '0', '1'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void put_u64(std::ostream& os, uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }

uint32_t get_u32(std::istream& is) {
    uint32_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), 4)) throw std::runtime_error("corrupt checkpoint");
    return v;
}

uint64_t get_u64(std::istream& is) {
    uint64_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), 8)) throw std::runtime_error("corrupt checkpoint");
    return v;
}

io::Array plain_array(const Mat& m) { return io::array_from_mat(m); }

}  // namespace

void write_checkpoint(const std::string& path, const Checkpoint& ck) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw std::runtime_error("checkpoint: cannot open for write: " + path);
        os.write(kMagic, 8);
        put_u32(os, kVersion);
        put_u64(os, ck.step);
        put_u64(os, ck.opt_step);
        put_u32(os, static_cast<uint32_t>(ck.config_text.size()));
        os.write(ck.config_text.data(), static_cast<std::streamsize>(ck.config_text.size()));
        io::write_array_block(os, ck.params);
        io::write_array_block(os, ck.adam_m);
        io::write_array_block(os, ck.adam_v);
        if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("checkpoint: rename failed: " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    if (std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("checkpoint version mismatch in " + path);
    const uint32_t version = get_u32(is);
    if (version != kVersion)
        throw std::runtime_error("checkpoint version mismatch: got " + std::to_string(version) +
                                 ", expected " + std::to_string(kVersion));
    Checkpoint ck;
    try {
        ck.step = get_u64(is);
        ck.opt_step = get_u64(is);
        const uint32_t cfg_len = get_u32(is);
        ck.config_text.resize(cfg_len);
        if (!is.read(ck.config_text.data(), cfg_len)) throw std::runtime_error("corrupt checkpoint");
        ck.params = io::read_array_block(is);
        ck.adam_m = io::read_array_block(is);
        ck.adam_v = io::read_array_block(is);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("corrupt checkpoint: ") + path + ": " + e.what());
    }
    return ck;
}

Checkpoint snapshot(const model::Model& m, const Adam* opt, uint64_t step,
                    const io::RunConfig& cfg) {
    Checkpoint ck;
    ck.step = step;
    ck.config_text = io::serialize_run_config(cfg);
    const nn::ParamSet ps = m.params();
    for (const auto& [name, p] : ps) ck.params[name] = plain_array(p.value());
    if (opt) {
        ck.opt_step = opt->step_count();
        const auto& op = opt->params();
        for (size_t i = 0; i < op.size(); ++i) {
            ck.adam_m[op[i].first] = plain_array(opt->moment1()[i]);
            ck.adam_v[op[i].first] = plain_array(opt->moment2()[i]);
        }
    }
    return ck;
}

void restore_params(model::Model& m, const Checkpoint& ck) {
    nn::ParamSet ps = m.params();
    std::vector<std::string> missing, extra, shape;
    for (auto& [name, p] : ps) {
        const auto it = ck.params.find(name);
        if (it == ck.params.end()) {
            missing.push_back(name);
            continue;
        }
        const Mat stored = io::mat_from_array(it->second);
        if (stored.rows() != p.value().rows() || stored.cols() != p.value().cols()) {
            shape.push_back(name);
            continue;
        }
        p.value() = stored;
    }
    for (const auto& [name, a] : ck.params)
        if (!ps.find(name)) extra.push_back(name);
    if (!missing.empty() || !extra.empty() || !shape.empty()) {
        std::ostringstream msg;
        msg << "checkpoint incompatible with model:";
        for (const auto& n : missing) msg << " missing:" << n;
        for (const auto& n : extra) msg << " unexpected:" << n;
        for (const auto& n : shape) msg << " shape-mismatch:" << n;
        throw std::runtime_error(msg.str());
    }
}

void restore_optimizer(Adam& opt, const Checkpoint& ck) {
    if (ck.adam_m.empty() && ck.adam_v.empty()) return;  // saved without optimizer
    auto& op = opt.params();
    for (size_t i = 0; i < op.size(); ++i) {
        const auto& name = op[i].first;
        const auto im = ck.adam_m.find(name);
        const auto iv = ck.adam_v.find(name);
        if (im == ck.adam_m.end() || iv == ck.adam_v.end())
            throw std::runtime_error("checkpoint: optimizer state missing for " + name);
        opt.moment1()[i] = io::mat_from_array(im->second);
        opt.moment2()[i] = io::mat_from_array(iv->second);
    }
    opt.set_step_count(ck.opt_step);
}

void check_config_compatible(const io::RunConfig& current, const std::string& stored_text) {
    const io::RunConfig stored = io::parse_run_config_text(stored_text);
    const auto cur = io::config_key_values(current);
    const auto old = io::config_key_values(stored);
    const char* prefixes[] = {"model.", "sra.", "units."};
    std::vector<std::string> bad;
    for (const auto& [key, val] : cur) {
        bool relevant = key == "spectrogram.n_mels";
        for (const char* p : prefixes)
            if (key.rfind(p, 0) == 0) relevant = true;
        if (!relevant) continue;
        const auto it = old.find(key);
        if (it == old.end() || it->second != val) bad.push_back(key);
    }
    if (!bad.empty()) {
        std::ostringstream msg;
        msg << "checkpoint config mismatch on keys:";
        for (const auto& k : bad) msg << ' ' << k;
        throw std::runtime_error(msg.str());
    }
}

void save_checkpoint(const std::string& path, const model::Model& m, const Adam* opt,
                     uint64_t step, const io::RunConfig& cfg) {
    write_checkpoint(path, snapshot(m, opt, step, cfg));
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    LoadedCheckpoint lc;
    lc.raw = read_checkpoint(path);
    lc.step = lc.raw.step;
    lc.opt_step = lc.raw.opt_step;
    lc.config = io::parse_run_config_text(lc.raw.config_text);
    return lc;
}

}  // namespace lipsynth::train
