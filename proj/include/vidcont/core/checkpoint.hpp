#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vidcont/nn/tensor.hpp"

namespace vidcont {

// Versioned binary weight container shared by the tokenizer, the flow-warp
// extension (version bump + extra arrays) and the sequence model:
//   magic "VCKP" | u32 version | u64 config text length | config text |
//   u32 array count | per array: u32 name len, name, u32 ndim, u32 dims...,
//   f32 data (little-endian).
struct NamedArray {
    std::string name;
    nn::Shape shape;
    std::vector<float> data;
};

struct Checkpoint {
    uint32_t version = 1;
    std::string config_text;
    std::vector<NamedArray> arrays;

    const NamedArray *find(const std::string &name) const;
    const NamedArray &require(const std::string &name) const;
    void add(const std::string &name, const nn::Tensor &t);
    void add_raw(const std::string &name, nn::Shape shape, std::vector<float> data);

    void save(const std::string &path) const;
    static Checkpoint load(const std::string &path);
};

// Hash of a file's raw bytes; stage chaining compares these.
uint64_t file_hash(const std::string &path);

}  // namespace vidcont
