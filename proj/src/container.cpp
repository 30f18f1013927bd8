#include "emrseg/container.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <zlib.h>

#include "emrseg/errors.hpp"

namespace emrseg {

namespace {

std::uint32_t crc_of(const unsigned char* data, std::size_t n) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // crc32 takes uInt lengths; feed in chunks.
    while (n > 0) {
        uInt chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
        crc = crc32(crc, data, chunk);
        data += chunk;
        n -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

void put_u32(std::string* out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::string shape_text(const std::vector<std::size_t>& shape) {
    std::string s;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += 'x';
        s += std::to_string(shape[i]);
    }
    return s.empty() ? "1" : s;
}

std::vector<std::size_t> parse_shape(const std::string& s) {
    std::vector<std::size_t> shape;
    std::size_t p = 0;
    while (p < s.size()) {
        std::size_t q = s.find('x', p);
        if (q == std::string::npos) q = s.size();
        shape.push_back(static_cast<std::size_t>(std::stoull(s.substr(p, q - p))));
        p = q + 1;
    }
    return shape;
}

std::size_t dtype_size(const std::string& dtype) {
    if (dtype == "f64" || dtype == "u64") return 8;
    if (dtype == "f32") return 4;
    if (dtype == "u8") return 1;
    throw FormatError("unknown tensor dtype: " + dtype);
}

}  // namespace

void ContainerWriter::add_raw(const std::string& name, const std::string& dtype,
                              std::vector<std::size_t> shape, const void* data,
                              std::size_t bytes) {
    for (const Entry& e : entries_) {
        if (e.meta.name == name) throw Error("duplicate tensor name: " + name);
    }
    Entry e;
    e.meta.name = name;
    e.meta.dtype = dtype;
    e.meta.shape = std::move(shape);
    if (e.meta.count() * dtype_size(dtype) != bytes) {
        throw Error("tensor shape/bytes mismatch for " + name);
    }
    e.data.resize(bytes);
    std::memcpy(e.data.data(), data, bytes);
    entries_.push_back(std::move(e));
}

void ContainerWriter::add_f64(const std::string& name, std::vector<std::size_t> shape,
                              const double* data) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    add_raw(name, "f64", std::move(shape), data, n * sizeof(double));
}

void ContainerWriter::add_f32(const std::string& name, std::vector<std::size_t> shape,
                              const float* data) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    add_raw(name, "f32", std::move(shape), data, n * sizeof(float));
}

void ContainerWriter::add_u64(const std::string& name, std::vector<std::size_t> shape,
                              const std::uint64_t* data) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    add_raw(name, "u64", std::move(shape), data, n * sizeof(std::uint64_t));
}

void ContainerWriter::add_bytes(const std::string& name, const std::string& blob) {
    add_raw(name, "u8", {blob.size()}, blob.data(), blob.size());
}

void ContainerWriter::write(const std::string& path) const {
    std::string out;
    out.append(kContainerMagic, sizeof(kContainerMagic));
    put_u32(&out, kContainerVersion);

    std::size_t offset = 0;
    std::string manifest;
    for (const Entry& e : entries_) {
        manifest += e.meta.name;
        manifest += '\t';
        manifest += e.meta.dtype;
        manifest += '\t';
        manifest += shape_text(e.meta.shape);
        manifest += '\t';
        manifest += std::to_string(offset);
        manifest += '\t';
        manifest += std::to_string(e.data.size());
        manifest += '\n';
        offset += e.data.size();
    }
    manifest += '\n';
    out += manifest;
    for (const Entry& e : entries_) {
        out.append(reinterpret_cast<const char*>(e.data.data()), e.data.size());
    }
    put_u32(&out, crc_of(reinterpret_cast<const unsigned char*>(out.data()), out.size()));

    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write container: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("short write: " + path);
}

Container Container::read(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read container: " + path);
    std::string raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    if (raw.size() < sizeof(kContainerMagic) + 4 + 4) {
        throw FormatError("container too small: " + path);
    }
    if (std::memcmp(raw.data(), kContainerMagic, sizeof(kContainerMagic)) != 0) {
        throw FormatError("unknown container header: " + path);
    }
    std::uint32_t stored_crc = 0;
    for (int i = 0; i < 4; ++i) {
        stored_crc |= static_cast<std::uint32_t>(
                          static_cast<unsigned char>(raw[raw.size() - 4 + static_cast<std::size_t>(i)]))
                      << (8 * i);
    }
    std::uint32_t actual_crc =
        crc_of(reinterpret_cast<const unsigned char*>(raw.data()), raw.size() - 4);
    if (stored_crc != actual_crc) throw FormatError("container checksum mismatch: " + path);

    std::size_t pos = sizeof(kContainerMagic);
    std::uint32_t version = 0;
    for (int i = 0; i < 4; ++i) {
        version |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[pos + static_cast<std::size_t>(i)]))
                   << (8 * i);
    }
    pos += 4;
    if (version != kContainerVersion) {
        throw FormatError("unsupported container version " + std::to_string(version));
    }

    Container c;
    // manifest lines until the empty line
    while (true) {
        std::size_t eol = raw.find('\n', pos);
        if (eol == std::string::npos) throw FormatError("unterminated manifest: " + path);
        std::string line = raw.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty()) break;
        std::istringstream ls(line);
        TensorMeta m;
        std::string shape;
        std::string offset, bytes;
        if (!std::getline(ls, m.name, '\t') || !std::getline(ls, m.dtype, '\t') ||
            !std::getline(ls, shape, '\t') || !std::getline(ls, offset, '\t') ||
            !std::getline(ls, bytes)) {
            throw FormatError("bad manifest line: " + line);
        }
        m.shape = parse_shape(shape);
        m.offset = static_cast<std::size_t>(std::stoull(offset));
        m.bytes = static_cast<std::size_t>(std::stoull(bytes));
        if (m.count() * dtype_size(m.dtype) != m.bytes) {
            throw FormatError("manifest shape/bytes mismatch for " + m.name);
        }
        c.tensors_[m.name] = std::move(m);
    }

    std::size_t data_len = raw.size() - 4 - pos;
    c.data_.assign(raw.begin() + static_cast<std::ptrdiff_t>(pos),
                   raw.begin() + static_cast<std::ptrdiff_t>(pos + data_len));
    for (const auto& [name, m] : c.tensors_) {
        if (m.offset + m.bytes > c.data_.size()) {
            throw FormatError("tensor out of bounds: " + name);
        }
    }
    return c;
}

const TensorMeta& Container::meta(const std::string& name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw FormatError("missing tensor: " + name);
    return it->second;
}

const TensorMeta& Container::typed(const std::string& name, const std::string& dtype) const {
    const TensorMeta& m = meta(name);
    if (m.dtype != dtype) {
        throw FormatError("tensor " + name + " has dtype " + m.dtype + ", expected " + dtype);
    }
    return m;
}

std::vector<double> Container::f64(const std::string& name) const {
    const TensorMeta& m = typed(name, "f64");
    std::vector<double> out(m.count());
    std::memcpy(out.data(), data_.data() + m.offset, m.bytes);
    return out;
}

std::vector<float> Container::f32(const std::string& name) const {
    const TensorMeta& m = typed(name, "f32");
    std::vector<float> out(m.count());
    std::memcpy(out.data(), data_.data() + m.offset, m.bytes);
    return out;
}

std::vector<std::uint64_t> Container::u64(const std::string& name) const {
    const TensorMeta& m = typed(name, "u64");
    std::vector<std::uint64_t> out(m.count());
    std::memcpy(out.data(), data_.data() + m.offset, m.bytes);
    return out;
}

std::string Container::bytes(const std::string& name) const {
    const TensorMeta& m = typed(name, "u8");
    return std::string(reinterpret_cast<const char*>(data_.data() + m.offset), m.bytes);
}

}  // namespace emrseg
