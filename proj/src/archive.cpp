#include "dfi/archive.hpp"

#include "dfi/errors.hpp"
#include "dfi/io.hpp"

#include <cmath>
#include <sstream>

namespace dfi {

SurrogateFamily SurrogateArchive::family() const
{
    if (coord_dim != 1) throw ValidationError("archive: interpolation needs scalar station coordinates");
    return SurrogateFamily(station_coords, surrogates);
}

PceSurrogate SurrogateArchive::at(std::span<const double> coordinate) const
{
    if (coordinate.size() != coord_dim) throw ValidationError("archive: station coordinate dimension mismatch");
    if (coord_dim == 1) return family().interpolate(coordinate[0]);
    for (std::size_t i = 0; i < stations(); ++i) {
        bool match = true;
        for (std::size_t c = 0; c < coord_dim; ++c) {
            const double a = coord(i)[c];
            const double b = coordinate[c];
            if (std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(a))) match = false;
        }
        if (match) return surrogates[i];
    }
    throw ValidationError("archive: no surrogate at the requested two-dimensional station");
}

std::string format_archive(const SurrogateArchive& archive)
{
    std::ostringstream out;
    const auto& space = archive.parameters;
    out << "dfi-pce-archive 1\n"
        << "experiment " << archive.experiment_id << '\n'
        << "label " << archive.label << '\n'
        << "data_space " << to_string(archive.data_space) << '\n'
        << "dimension " << space.size() << '\n'
        << "order " << archive.order << '\n'
        << "coord_dim " << archive.coord_dim << '\n'
        << "checksum " << space.checksum() << '\n';
    for (const auto& p : space.entries()) {
        out << "param " << p.name << ' ' << io::format_double(p.nominal) << ' ' << io::format_double(p.lower) << ' '
            << io::format_double(p.upper) << ' ' << (p.unit.empty() ? "-" : p.unit) << '\n';
    }
    for (std::size_t i = 0; i < archive.stations(); ++i) {
        out << "station";
        for (double c : archive.coord(i)) out << ' ' << io::format_double(c);
        out << '\n';
        const auto& surrogate = archive.surrogates[i];
        out << "terms " << surrogate.indices().size() << '\n';
        for (std::size_t t = 0; t < surrogate.indices().size(); ++t) {
            for (int d : surrogate.indices()[t].degrees) out << d << ' ';
            out << io::format_double(surrogate.coefficients()[t]) << '\n';
        }
    }
    return out.str();
}

namespace {

class LineReader {
public:
    LineReader(std::string_view text, std::string_view source)
        : in_(std::string(text))
        , source_(source)
    {
    }

    bool next(std::vector<std::string>& tokens)
    {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_;
            line = io::trim(line);
            if (line.empty() || line.front() == '#') continue;
            tokens.clear();
            std::istringstream words(line);
            std::string w;
            while (words >> w) tokens.push_back(w);
            raw_ = line;
            return true;
        }
        return false;
    }

    std::vector<std::string> expect(const std::string& keyword, std::size_t min_tokens)
    {
        std::vector<std::string> tokens;
        if (!next(tokens) || tokens.front() != keyword || tokens.size() < min_tokens) fail("expected '" + keyword + "'");
        return tokens;
    }

    [[noreturn]] void fail(const std::string& why) const
    {
        throw ValidationError(source_ + " line " + std::to_string(line_) + ": " + why);
    }

    [[nodiscard]] std::string where() const { return source_ + " line " + std::to_string(line_); }
    [[nodiscard]] const std::string& raw() const { return raw_; }

private:
    std::istringstream in_;
    std::string source_;
    std::size_t line_ = 0;
    std::string raw_;
};

} // namespace

SurrogateArchive parse_archive(std::string_view text, std::string_view source_name)
{
    LineReader reader(text, source_name);
    SurrogateArchive archive;
    auto magic = reader.expect("dfi-pce-archive", 2);
    if (magic[1] != "1") reader.fail("unsupported archive version");
    archive.experiment_id = static_cast<int>(io::parse_integer(reader.expect("experiment", 2)[1], reader.where()));
    reader.expect("label", 1);
    archive.label = io::trim(std::string_view(reader.raw()).substr(5));
    const auto space_name = reader.expect("data_space", 2)[1];
    if (space_name == "linear") archive.data_space = DataSpace::linear;
    else if (space_name == "log10") archive.data_space = DataSpace::log10;
    else reader.fail("unknown data_space '" + space_name + "'");
    const auto dimension = io::parse_integer(reader.expect("dimension", 2)[1], reader.where());
    archive.order = static_cast<int>(io::parse_integer(reader.expect("order", 2)[1], reader.where()));
    const auto coord_dim = io::parse_integer(reader.expect("coord_dim", 2)[1], reader.where());
    if (coord_dim != 1 && coord_dim != 2) reader.fail("coord_dim must be 1 or 2");
    archive.coord_dim = static_cast<std::size_t>(coord_dim);
    const auto checksum = reader.expect("checksum", 2)[1];
    if (dimension < 1) reader.fail("dimension must be >= 1");

    std::vector<Parameter> params;
    for (long long j = 0; j < dimension; ++j) {
        const auto t = reader.expect("param", 6);
        Parameter p;
        p.name = t[1];
        p.nominal = io::parse_double(t[2], reader.where());
        p.lower = io::parse_double(t[3], reader.where());
        p.upper = io::parse_double(t[4], reader.where());
        p.unit = t[5] == "-" ? "" : t[5];
        params.push_back(std::move(p));
    }
    archive.parameters = ParameterSpace(std::move(params));
    if (archive.parameters.checksum() != checksum) reader.fail("bounds checksum mismatch");

    const auto s = static_cast<std::size_t>(dimension);
    std::vector<std::string> tokens;
    while (reader.next(tokens)) {
        if (tokens.front() != "station" || tokens.size() != 1 + archive.coord_dim) reader.fail("expected 'station'");
        for (std::size_t c = 0; c < archive.coord_dim; ++c) {
            archive.station_coords.push_back(io::parse_double(tokens[1 + c], reader.where()));
        }
        const auto count = io::parse_integer(reader.expect("terms", 2)[1], reader.where());
        std::vector<MultiIndex> indices;
        std::vector<double> coefficients;
        for (long long t = 0; t < count; ++t) {
            if (!reader.next(tokens) || tokens.size() != s + 1) reader.fail("malformed term row");
            MultiIndex u;
            for (std::size_t j = 0; j < s; ++j) u.degrees.push_back(static_cast<int>(io::parse_integer(tokens[j], reader.where())));
            indices.push_back(std::move(u));
            coefficients.push_back(io::parse_double(tokens[s], reader.where()));
        }
        try {
            archive.surrogates.emplace_back(archive.parameters, std::move(indices), std::move(coefficients));
        } catch (const ValidationError& e) {
            reader.fail(e.what());
        }
    }
    if (archive.surrogates.empty()) throw ValidationError(std::string(source_name) + ": archive has no stations");
    if (archive.coord_dim == 1) (void)archive.family(); // validates ordering
    return archive;
}

SurrogateArchive load_archive(const std::filesystem::path& path)
{
    return parse_archive(io::read_text(path), path.string());
}

void write_archive(const std::filesystem::path& path, const SurrogateArchive& archive)
{
    io::write_text(path, format_archive(archive));
}

} // namespace dfi
