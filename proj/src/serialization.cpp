#include "dyadic/serialization.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <istream>
#include <ostream>

#include "dyadic/errors.hpp"

namespace dyadic {

namespace {

constexpr std::array<char, 4> kMagic{'D', 'Y', 'F', 'C'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kKindField = 0;
constexpr std::uint32_t kKindBlocks = 1;

template <class T>
void put(std::ostream& out, T value)
{
    std::array<char, sizeof(T)> bytes;
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
    out.write(bytes.data(), bytes.size());
}

template <class T>
T get(std::istream& in)
{
    std::array<unsigned char, sizeof(T)> bytes;
    if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) throw FormatError("truncated container");
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(static_cast<T>(bytes[i]) << (8 * i));
    return value;
}

void put_double(std::ostream& out, double v) { put(out, std::bit_cast<std::uint64_t>(v)); }
double get_double(std::istream& in) { return std::bit_cast<double>(get<std::uint64_t>(in)); }

void put_matrix(std::ostream& out, const Mat& m)
{
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            put_double(out, m(r, c).real());
            put_double(out, m(r, c).imag());
        }
}

Mat get_matrix(std::istream& in, int d)
{
    Mat m(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) {
            const double re = get_double(in);
            const double im = get_double(in);
            m(r, c) = Complex(re, im);
        }
    return m;
}

void put_header(std::ostream& out, std::uint32_t kind, const DyadicGrid& grid, int d)
{
    out.write(kMagic.data(), kMagic.size());
    put(out, kVersion);
    put(out, kind);
    put(out, static_cast<std::uint32_t>(grid.dim()));
    put(out, static_cast<std::uint32_t>(grid.levels()));
    put(out, static_cast<std::uint32_t>(d));
    const int depth = grid.shift() ? grid.shift()->depth() : 0;
    put(out, static_cast<std::uint32_t>(depth));
    for (int level = 1; level <= depth; ++level)
        for (int c = 0; c < grid.dim(); ++c) put(out, static_cast<std::uint8_t>(grid.shift()->bit(level, c)));
}

struct Header {
    std::uint32_t kind;
    GridHandle grid;
    int d;
};

GridHandle make_grid(int n, int levels, std::vector<std::vector<std::uint8_t>> bits)
{
    if (bits.empty()) return DyadicGrid::standard(n, levels);
    return DyadicGrid::shifted(n, levels, std::make_shared<const ShiftStream>(n, std::move(bits)));
}

Header get_header(std::istream& in)
{
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw FormatError("bad container magic");
    if (get<std::uint32_t>(in) != kVersion) throw FormatError("unsupported container version");
    const auto kind = get<std::uint32_t>(in);
    const auto n = get<std::uint32_t>(in);
    const auto levels = get<std::uint32_t>(in);
    const auto d = get<std::uint32_t>(in);
    const auto depth = get<std::uint32_t>(in);
    if (n < 1 || n > 26 || levels > 26 || d < 1 || d > 4096 || depth > static_cast<std::uint32_t>(kMaxLevel))
        throw FormatError("container header out of range");
    std::vector<std::vector<std::uint8_t>> bits(depth, std::vector<std::uint8_t>(n));
    for (auto& level_bits : bits)
        for (auto& b : level_bits) b = get<std::uint8_t>(in);
    return {kind, make_grid(static_cast<int>(n), static_cast<int>(levels), std::move(bits)),
            static_cast<int>(d)};
}

nlohmann::json shift_json(const DyadicGrid& grid)
{
    if (!grid.shift()) return nullptr;
    nlohmann::json lines = nlohmann::json::array();
    for (int level = 1; level <= grid.shift()->depth(); ++level) {
        std::string line;
        for (int c = 0; c < grid.dim(); ++c) line += grid.shift()->bit(level, c) ? '1' : '0';
        lines.push_back(line);
    }
    return lines;
}

GridHandle grid_from_json(const nlohmann::json& j)
{
    const int n = j.at("n").get<int>();
    const int levels = j.at("L").get<int>();
    std::vector<std::vector<std::uint8_t>> bits;
    if (j.contains("shift") && !j.at("shift").is_null())
        for (const auto& line : j.at("shift")) {
            const auto text = line.get<std::string>();
            if (static_cast<int>(text.size()) != n) throw FormatError("shift line length differs from n");
            std::vector<std::uint8_t> level_bits;
            for (char ch : text) {
                if (ch != '0' && ch != '1') throw FormatError("shift lines hold only 0 and 1");
                level_bits.push_back(static_cast<std::uint8_t>(ch - '0'));
            }
            bits.push_back(std::move(level_bits));
        }
    return make_grid(n, levels, std::move(bits));
}

void write_file(const std::filesystem::path& path, const auto& writer)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    writer(out);
    if (!out) throw FormatError("write to " + path.string() + " failed");
}

std::ifstream open_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    return in;
}

} // namespace

void write_field(std::ostream& out, const MatrixField& f)
{
    put_header(out, kKindField, *f.grid(), f.matrix_size());
    for (std::size_t c = 0; c < f.cell_count(); ++c) put_matrix(out, f.cell(c));
}

MatrixField read_field(std::istream& in)
{
    const Header h = get_header(in);
    if (h.kind != kKindField) throw FormatError("container does not hold a field");
    MatrixField f(h.grid, h.d);
    for (std::size_t c = 0; c < f.cell_count(); ++c) f.cell(c) = get_matrix(in, h.d);
    return f;
}

void write_blocks(std::ostream& out, const GridHandle& grid, int d, const BlockMap& blocks)
{
    put_header(out, kKindBlocks, *grid, d);
    put(out, static_cast<std::uint64_t>(blocks.size()));
    for (const auto& [key, value] : blocks) {
        put(out, static_cast<std::uint64_t>(key.first));
        put(out, static_cast<std::uint64_t>(key.second));
        put_matrix(out, value);
    }
}

BlockPayload read_blocks(std::istream& in)
{
    Header h = get_header(in);
    if (h.kind != kKindBlocks) throw FormatError("container does not hold a block list");
    BlockPayload payload{std::move(h.grid), h.d, {}};
    const auto count = get<std::uint64_t>(in);
    const std::size_t limit = payload.grid->cell_count();
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto row = get<std::uint64_t>(in);
        const auto col = get<std::uint64_t>(in);
        if (row >= limit || col >= limit) throw FormatError("block index beyond the basis");
        payload.blocks[{row, col}] = get_matrix(in, h.d);
    }
    return payload;
}

nlohmann::json field_to_json(const MatrixField& f)
{
    nlohmann::json cells = nlohmann::json::array();
    for (std::size_t c = 0; c < f.cell_count(); ++c) {
        nlohmann::json entries = nlohmann::json::array();
        const ConstCellMap m = f.cell(c);
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index k = 0; k < m.cols(); ++k) entries.push_back({m(r, k).real(), m(r, k).imag()});
        cells.push_back(std::move(entries));
    }
    return {{"n", f.dim()},
            {"L", f.levels()},
            {"d", f.matrix_size()},
            {"shift", shift_json(*f.grid())},
            {"cells", std::move(cells)}};
}

MatrixField field_from_json(const nlohmann::json& j)
{
    try {
        const int d = j.at("d").get<int>();
        MatrixField f(grid_from_json(j), d);
        const auto& cells = j.at("cells");
        if (cells.size() != f.cell_count()) throw FormatError("cell count differs from 2^(L n)");
        for (std::size_t c = 0; c < f.cell_count(); ++c) {
            const auto& entries = cells[c];
            if (entries.size() != static_cast<std::size_t>(d * d)) throw FormatError("cell holds wrong entry count");
            CellMap m = f.cell(c);
            for (int r = 0; r < d; ++r)
                for (int k = 0; k < d; ++k) {
                    const auto& pair = entries[static_cast<std::size_t>(r * d + k)];
                    m(r, k) = Complex(pair.at(0).get<double>(), pair.at(1).get<double>());
                }
        }
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(e.what());
    }
}

// ---------------------------------------------------------------- manifests

namespace {

std::filesystem::path payload_path(const std::filesystem::path& manifest, const std::string& part)
{
    return manifest.parent_path() / (manifest.stem().string() + "." + part + ".dyfc");
}

BlockMap perfect_blocks(const PerfectDyadicCZO& t)
{
    BlockMap blocks;
    const auto& grid = *t.grid();
    const unsigned s = signature_count(grid.dim());
    for (int j = 0; j < grid.levels(); ++j)
        for (std::size_t cube = 0; cube < grid.cube_count(j); ++cube)
            for (unsigned eta = 1; eta <= s; ++eta)
                for (unsigned theta = 1; theta <= s; ++theta) {
                    const Mat block = t.xi(j, cube, eta, theta);
                    if (block.isZero(0.0)) continue;
                    blocks[{haar_index(grid.dim(), j, cube, eta), haar_index(grid.dim(), j, cube, theta)}] = block;
                }
    return blocks;
}

} // namespace

void save_operator(const std::filesystem::path& manifest, const OperatorVariant& op)
{
    nlohmann::json j{{"format", "dyadic-operator"}, {"version", 1}};
    std::visit(
        [&](const auto& value) {
            using T = std::decay_t<decltype(value)>;
            const auto& grid = *value.grid();
            j["n"] = grid.dim();
            j["L"] = grid.levels();
            j["shift"] = shift_json(grid);
            if constexpr (std::is_same_v<T, PerfectDyadicCZO>) {
                j["kind"] = "perfect";
                j["d"] = value.matrix_size();
                j["payload"] = {{"xi", payload_path(manifest, "xi").filename().string()},
                                {"b_col", payload_path(manifest, "b_col").filename().string()},
                                {"b_row", payload_path(manifest, "b_row").filename().string()}};
                write_file(payload_path(manifest, "xi"), [&](std::ostream& out) {
                    write_blocks(out, value.grid(), value.matrix_size(), perfect_blocks(value));
                });
                write_file(payload_path(manifest, "b_col"), [&](std::ostream& out) { write_field(out, value.b_col()); });
                write_file(payload_path(manifest, "b_row"), [&](std::ostream& out) { write_field(out, value.b_row()); });
            } else if constexpr (std::is_same_v<T, HaarTensorOperator>) {
                j["kind"] = "tensor";
                j["d"] = value.matrix_size();
                j["payload"] = {{"entries", payload_path(manifest, "entries").filename().string()}};
                write_file(payload_path(manifest, "entries"), [&](std::ostream& out) {
                    write_blocks(out, value.grid(), value.matrix_size(), value.entries());
                });
            } else {
                j["kind"] = "shift";
                nlohmann::json signs = nlohmann::json::array();
                const unsigned s = signature_count(grid.dim());
                for (int level = 1; level < grid.levels(); ++level)
                    for (std::size_t cube = 0; cube < grid.cube_count(level); ++cube)
                        for (unsigned theta = 1; theta <= s; ++theta) signs.push_back(value.sign(level, cube, theta));
                j["signs"] = std::move(signs);
            }
        },
        op);
    write_file(manifest, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

OperatorVariant load_operator(const std::filesystem::path& manifest)
{
    nlohmann::json j;
    try {
        auto in = open_file(manifest);
        j = nlohmann::json::parse(in);
        if (j.at("format").get<std::string>() != "dyadic-operator" || j.at("version").get<int>() != 1)
            throw FormatError("not a version 1 operator manifest");
        const GridHandle grid = grid_from_json(j);
        const std::string kind = j.at("kind").get<std::string>();
        auto payload = [&](const char* part) { return manifest.parent_path() / j.at("payload").at(part).get<std::string>(); };
        auto load_field = [&](const char* part) {
            auto file = open_file(payload(part));
            MatrixField f = read_field(file);
            if (!f.grid()->same_as(*grid)) throw FormatError(std::string(part) + " payload grid differs");
            return f;
        };
        auto load_blocks = [&](const char* part) {
            auto file = open_file(payload(part));
            BlockPayload p = read_blocks(file);
            if (!p.grid->same_as(*grid)) throw FormatError(std::string(part) + " payload grid differs");
            return p;
        };

        if (kind == "perfect") {
            const int d = j.at("d").get<int>();
            PerfectDyadicCZO t(grid, d);
            const BlockPayload xi = load_blocks("xi");
            for (const auto& [key, value] : xi.blocks) {
                const HaarLabel row = haar_label(grid->dim(), key.first);
                const HaarLabel col = haar_label(grid->dim(), key.second);
                if (row.coarse || col.coarse || row.cube_level != col.cube_level || row.cube != col.cube)
                    throw FormatError("perfect xi block off the cube diagonal");
                t.xi(row.cube_level, row.cube, row.theta, col.theta) = value;
            }
            t.set_b_col(load_field("b_col"));
            t.set_b_row(load_field("b_row"));
            return t;
        }
        if (kind == "tensor") {
            const int d = j.at("d").get<int>();
            HaarTensorOperator t(grid, d);
            for (const auto& [key, value] : load_blocks("entries").blocks) t.set(key.first, key.second, value);
            return t;
        }
        if (kind == "shift") {
            DyadicShift s(grid);
            const auto& signs = j.at("signs");
            const unsigned count = signature_count(grid->dim());
            std::size_t k = 0;
            for (int level = 1; level < grid->levels(); ++level)
                for (std::size_t cube = 0; cube < grid->cube_count(level); ++cube)
                    for (unsigned theta = 1; theta <= count; ++theta) s.set_sign(level, cube, theta, signs.at(k++).get<int>());
            if (k != signs.size()) throw FormatError("shift manifest holds extra signs");
            return s;
        }
        throw FormatError("unknown operator kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(e.what());
    }
}

} // namespace dyadic
