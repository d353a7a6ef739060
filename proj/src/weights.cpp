#include "flamedet/weights.hpp"

#include <cstring>
#include <fstream>

namespace flamedet {

namespace {

constexpr char kMagic[4] = {'L', 'Y', 'F', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint64_t kAlign = 64;
constexpr std::size_t kMaxTensorElems = std::size_t{1} << 31;

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct Reader {
    const unsigned char* p;
    std::size_t size;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > size) throw FormatError("weight file truncated");
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(p[pos] | (p[pos + 1] << 8));
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(p + pos), n);
        pos += n;
        return s;
    }
};

}  // namespace

const StoredTensor& WeightStore::get(const std::string& name) const {
    auto it = entries.find(name);
    if (it == entries.end()) throw LoadError("missing weight tensor: " + name);
    return it->second;
}

void save_weights(const WeightStore& store, const std::filesystem::path& path) {
    std::string header;
    header.append(kMagic, 4);
    put_u32(header, kVersion);
    put_u32(header, static_cast<std::uint32_t>(store.entries.size()));

    // Directory in map (name-sorted) order; offsets assigned in the same order.
    std::uint64_t offset = 0;
    std::vector<std::uint64_t> offsets;
    offsets.reserve(store.entries.size());
    for (const auto& [name, t] : store.entries) {
        if (name.size() > 0xffff) throw FormatError("tensor name too long: " + name);
        if (t.dims.empty() || t.dims.size() > 4)
            throw FormatError("tensor rank must be 1..4: " + name);
        if (t.numel() != t.data.size())
            throw FormatError("tensor dims do not match data size: " + name);
        put_u16(header, static_cast<std::uint16_t>(name.size()));
        header.append(name);
        header.push_back(0);  // dtype f32
        header.push_back(static_cast<char>(t.dims.size()));
        for (std::uint32_t d : t.dims) put_u32(header, d);
        offset = (offset + kAlign - 1) / kAlign * kAlign;
        put_u64(header, offset);
        offsets.push_back(offset);
        offset += t.data.size() * sizeof(float);
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open for writing: " + path.string());
    out.write(header.data(), static_cast<std::streamsize>(header.size()));

    std::uint64_t written = 0;
    std::size_t idx = 0;
    for (const auto& [name, t] : store.entries) {
        const std::uint64_t target = offsets[idx++];
        if (target > written) {
            std::string pad(target - written, '\0');
            out.write(pad.data(), static_cast<std::streamsize>(pad.size()));
            written = target;
        }
        out.write(reinterpret_cast<const char*>(t.data.data()),
                  static_cast<std::streamsize>(t.data.size() * sizeof(float)));
        written += t.data.size() * sizeof(float);
    }
    if (!out) throw FormatError("write failed: " + path.string());
}

WeightStore load_weights(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open weight file: " + path.string());
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Reader r{reinterpret_cast<const unsigned char*>(blob.data()), blob.size()};

    if (r.bytes(4) != std::string(kMagic, 4))
        throw FormatError("bad magic in weight file: " + path.string());
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw FormatError("unsupported weight file version " + std::to_string(version));
    const std::uint32_t count = r.u32();
    if (count > 1'000'000) throw FormatError("implausible tensor count");

    struct Entry {
        std::string name;
        std::vector<std::uint32_t> dims;
        std::uint64_t offset;
        std::size_t numel;
    };
    std::vector<Entry> dir;
    dir.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        Entry e;
        e.name = r.bytes(r.u16());
        const std::uint8_t dtype = static_cast<std::uint8_t>(r.bytes(1)[0]);
        if (dtype != 0) throw FormatError("unsupported dtype in tensor " + e.name);
        const std::uint8_t rank = static_cast<std::uint8_t>(r.bytes(1)[0]);
        if (rank < 1 || rank > 4) throw FormatError("bad rank in tensor " + e.name);
        std::size_t numel = 1;
        for (int d = 0; d < rank; ++d) {
            const std::uint32_t dim = r.u32();
            if (dim == 0) throw FormatError("zero dimension in tensor " + e.name);
            e.dims.push_back(dim);
            numel *= dim;
            if (numel > kMaxTensorElems) throw FormatError("tensor too large: " + e.name);
        }
        e.numel = numel;
        e.offset = r.u64();
        if (e.offset % kAlign != 0)
            throw FormatError("misaligned payload offset in tensor " + e.name);
        dir.push_back(std::move(e));
    }

    const std::size_t payload_start = r.pos;
    const std::size_t payload_size = blob.size() - payload_start;
    WeightStore store;
    for (Entry& e : dir) {
        const std::uint64_t bytes = static_cast<std::uint64_t>(e.numel) * sizeof(float);
        if (e.offset > payload_size || e.offset + bytes > payload_size)
            throw FormatError("payload overflow in tensor " + e.name);
        StoredTensor t;
        t.dims = std::move(e.dims);
        t.data.resize(e.numel);
        std::memcpy(t.data.data(), blob.data() + payload_start + e.offset,
                    static_cast<std::size_t>(bytes));
        if (!store.entries.emplace(e.name, std::move(t)).second)
            throw FormatError("duplicate tensor name: " + e.name);
    }
    return store;
}

}  // namespace flamedet
