#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace emrseg {

// Tensor container: magic "EMRSEG1\0", format version u32 LE, a UTF-8
// manifest of "name\tdtype\tshape\toffset\tlength" lines terminated by an
// empty line, the raw little-endian arrays, and a trailing CRC-32 of all
// preceding bytes. Offsets are relative to the start of the data region.
inline constexpr char kContainerMagic[8] = {'E', 'M', 'R', 'S', 'E', 'G', '1', '\0'};
inline constexpr std::uint32_t kContainerVersion = 1;

struct TensorMeta {
    std::string name;
    std::string dtype;  // f64, f32, u64, u8
    std::vector<std::size_t> shape;
    std::size_t offset = 0;
    std::size_t bytes = 0;

    std::size_t count() const {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return n;
    }
};

class ContainerWriter {
public:
    void add_f64(const std::string& name, std::vector<std::size_t> shape,
                 const double* data);
    void add_f32(const std::string& name, std::vector<std::size_t> shape,
                 const float* data);
    void add_u64(const std::string& name, std::vector<std::size_t> shape,
                 const std::uint64_t* data);
    void add_bytes(const std::string& name, const std::string& blob);

    void write(const std::string& path) const;

private:
    struct Entry {
        TensorMeta meta;
        std::vector<unsigned char> data;
    };
    std::vector<Entry> entries_;
    void add_raw(const std::string& name, const std::string& dtype,
                 std::vector<std::size_t> shape, const void* data, std::size_t bytes);
};

class Container {
public:
    // Verifies magic, version, and the trailing CRC-32.
    static Container read(const std::string& path);

    bool has(const std::string& name) const { return tensors_.count(name) > 0; }
    const TensorMeta& meta(const std::string& name) const;

    std::vector<double> f64(const std::string& name) const;
    std::vector<float> f32(const std::string& name) const;
    std::vector<std::uint64_t> u64(const std::string& name) const;
    std::string bytes(const std::string& name) const;

private:
    std::vector<unsigned char> data_;  // data region
    std::map<std::string, TensorMeta> tensors_;
    const TensorMeta& typed(const std::string& name, const std::string& dtype) const;
};

}  // namespace emrseg
