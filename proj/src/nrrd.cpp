#include "radiomx/nrrd.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace radiomx {
namespace {

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::vector<double> parse_numbers(const std::string& field, const std::string& text) {
    std::vector<double> out;
    std::string cleaned = text;
    for (char& c : cleaned) {
        if (c == '(' || c == ')' || c == ',') c = ' ';
    }
    std::istringstream in(cleaned);
    std::string token;
    while (in >> token) {
        try {
            std::size_t used = 0;
            double v = std::stod(token, &used);
            if (used != token.size()) throw std::invalid_argument(token);
            out.push_back(v);
        } catch (const std::exception&) {
            throw NrrdError("nrrd field '" + field + "': cannot parse '" + token + "'");
        }
    }
    return out;
}

struct Header {
    std::map<std::string, std::string> fields;
    std::size_t data_offset = 0;
};

Header parse_header(const std::string& bytes, const std::filesystem::path& path) {
    Header h;
    std::size_t pos = bytes.find('\n');
    if (pos == std::string::npos) throw NrrdError("nrrd: truncated header in " + path.string());
    std::string magic = trim(bytes.substr(0, pos));
    if (magic.size() != 8 || magic.rfind("NRRD000", 0) != 0 || magic[7] < '1' || magic[7] > '5') {
        throw NrrdError("nrrd: bad magic line '" + magic + "' in " + path.string());
    }
    ++pos;
    while (true) {
        std::size_t end = bytes.find('\n', pos);
        if (end == std::string::npos) throw NrrdError("nrrd: header not terminated by a blank line");
        std::string line = bytes.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) break;
        if (line[0] == '#') continue;
        if (line.find(":=") != std::string::npos) continue;  // key/value pairs
        std::size_t colon = line.find(": ");
        if (colon == std::string::npos) throw NrrdError("nrrd: malformed header line '" + line + "'");
        h.fields[lower(trim(line.substr(0, colon)))] = trim(line.substr(colon + 2));
    }
    h.data_offset = pos;
    return h;
}

const std::string& required(const Header& h, const std::string& key) {
    auto it = h.fields.find(key);
    if (it == h.fields.end()) throw NrrdError("nrrd: missing required field '" + key + "'");
    return it->second;
}

NrrdType parse_type(const std::string& raw) {
    const std::string t = lower(raw);
    if (t == "short" || t == "short int" || t == "signed short" || t == "signed short int" ||
        t == "int16" || t == "int16_t") {
        return NrrdType::Int16;
    }
    if (t == "float") return NrrdType::Float32;
    if (t == "uchar" || t == "unsigned char" || t == "uint8" || t == "uint8_t") return NrrdType::UInt8;
    throw NrrdError("nrrd field 'type': unsupported element type '" + raw + "'");
}

std::size_t element_size(NrrdType t) {
    switch (t) {
        case NrrdType::Int16: return 2;
        case NrrdType::Float32: return 4;
        case NrrdType::UInt8: return 1;
    }
    return 1;
}

const char* type_name(NrrdType t) {
    switch (t) {
        case NrrdType::Int16: return "short";
        case NrrdType::Float32: return "float";
        case NrrdType::UInt8: return "uchar";
    }
    return "uchar";
}

std::string gunzip(const std::string& in) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 32) != Z_OK) throw NrrdError("nrrd field 'encoding': zlib init failed");
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
    zs.avail_in = static_cast<uInt>(in.size());
    std::string out;
    char buf[1 << 15];
    int rc = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw NrrdError("nrrd field 'encoding': corrupt gzip payload");
        }
        out.append(buf, sizeof(buf) - zs.avail_out);
    } while (rc != Z_STREAM_END && (zs.avail_in > 0 || zs.avail_out == 0));
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) throw NrrdError("nrrd field 'encoding': truncated gzip payload");
    return out;
}

std::string gzip(const std::string& in) {
    z_stream zs{};
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
        throw Error("nrrd: zlib init failed");
    }
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
    zs.avail_in = static_cast<uInt>(in.size());
    std::string out;
    char buf[1 << 15];
    int rc = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        rc = deflate(&zs, Z_FINISH);
        out.append(buf, sizeof(buf) - zs.avail_out);
    } while (rc == Z_OK);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw Error("nrrd: gzip compression failed");
    return out;
}

struct Decoded {
    Geometry geometry;
    std::vector<double> values;
};

Decoded decode(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw NrrdError("nrrd: cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    Header h = parse_header(bytes, path);

    if (h.fields.count("data file") || h.fields.count("datafile")) {
        throw NrrdError("nrrd field 'data file': detached payloads are not supported");
    }
    const auto dim = parse_numbers("dimension", required(h, "dimension"));
    if (dim.size() != 1 || dim[0] != 3.0) {
        throw NrrdError("nrrd field 'dimension': only 3 is supported, got '" + required(h, "dimension") + "'");
    }
    const auto sizes = parse_numbers("sizes", required(h, "sizes"));
    if (sizes.size() != 3) throw NrrdError("nrrd field 'sizes': expected 3 values");
    Geometry g;
    for (int a = 0; a < 3; ++a) {
        if (sizes[a] < 1 || sizes[a] != std::floor(sizes[a])) {
            throw NrrdError("nrrd field 'sizes': invalid size '" + required(h, "sizes") + "'");
        }
        g.dims[a] = static_cast<int>(sizes[a]);
    }
    const NrrdType type = parse_type(required(h, "type"));
    const std::string encoding = lower(required(h, "encoding"));
    if (encoding != "raw" && encoding != "gzip" && encoding != "gz") {
        throw NrrdError("nrrd field 'encoding': unsupported encoding '" + encoding + "'");
    }

    if (auto it = h.fields.find("space directions"); it != h.fields.end()) {
        auto d = parse_numbers("space directions", it->second);
        if (d.size() != 9) throw NrrdError("nrrd field 'space directions': expected three 3-vectors");
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                double v = d[static_cast<std::size_t>(r * 3 + c)];
                if (r != c && v != 0.0) {
                    throw NrrdError("nrrd field 'space directions': only diagonal directions are supported");
                }
                if (r == c && !(v > 0.0)) {
                    throw NrrdError("nrrd field 'space directions': diagonal entries must be positive");
                }
            }
            g.spacing[r] = d[static_cast<std::size_t>(r * 4)];
        }
    } else if (auto sp = h.fields.find("spacings"); sp != h.fields.end()) {
        auto s = parse_numbers("spacings", sp->second);
        if (s.size() != 3) throw NrrdError("nrrd field 'spacings': expected 3 values");
        for (int a = 0; a < 3; ++a) {
            if (!(s[a] > 0.0)) throw NrrdError("nrrd field 'spacings': spacing must be positive");
            g.spacing[a] = s[a];
        }
    }
    if (auto it = h.fields.find("space origin"); it != h.fields.end()) {
        auto o = parse_numbers("space origin", it->second);
        if (o.size() != 3) throw NrrdError("nrrd field 'space origin': expected a 3-vector");
        g.origin = {o[0], o[1], o[2]};
    }
    bool big_endian = false;
    if (auto it = h.fields.find("endian"); it != h.fields.end()) {
        const std::string e = lower(it->second);
        if (e == "big") {
            big_endian = true;
        } else if (e != "little") {
            throw NrrdError("nrrd field 'endian': unknown value '" + it->second + "'");
        }
    }

    std::string payload = bytes.substr(h.data_offset);
    if (encoding != "raw") payload = gunzip(payload);
    const std::size_t esize = element_size(type);
    const std::size_t expected = g.voxel_count() * esize;
    if (payload.size() != expected) {
        throw NrrdError("nrrd payload: size " + std::to_string(payload.size()) + " bytes does not match 'sizes' x 'type' (" +
                        std::to_string(expected) + " bytes)");
    }
    const bool swap = big_endian != (std::endian::native == std::endian::big);

    Decoded out{g, std::vector<double>(g.voxel_count())};
    const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        unsigned char tmp[4];
        std::memcpy(tmp, p + i * esize, esize);
        if (swap) std::reverse(tmp, tmp + esize);
        switch (type) {
            case NrrdType::Int16: {
                std::int16_t v;
                std::memcpy(&v, tmp, 2);
                out.values[i] = v;
                break;
            }
            case NrrdType::Float32: {
                float v;
                std::memcpy(&v, tmp, 4);
                if (!std::isfinite(v)) throw NrrdError("nrrd payload: non-finite float value");
                out.values[i] = v;
                break;
            }
            case NrrdType::UInt8: out.values[i] = tmp[0]; break;
        }
    }
    return out;
}

std::string format_vec(const Vec3& v, bool parens) {
    std::ostringstream os;
    os << std::setprecision(17);
    if (parens) os << '(';
    os << v[0] << (parens ? "," : " ") << v[1] << (parens ? "," : " ") << v[2];
    if (parens) os << ')';
    return os.str();
}

void write_payload(const Geometry& g, NrrdType type, NrrdEncoding encoding, const std::string& payload,
                   const std::filesystem::path& path) {
    std::ostringstream hdr;
    hdr << std::setprecision(17);
    hdr << "NRRD0004\n"
        << "# written by radiomx\n"
        << "type: " << type_name(type) << "\n"
        << "dimension: 3\n"
        << "space: left-posterior-superior\n"
        << "sizes: " << g.dims[0] << " " << g.dims[1] << " " << g.dims[2] << "\n"
        << "space directions: " << format_vec({g.spacing[0], 0, 0}, true) << " "
        << format_vec({0, g.spacing[1], 0}, true) << " " << format_vec({0, 0, g.spacing[2]}, true) << "\n"
        << "kinds: domain domain domain\n";
    if (type != NrrdType::UInt8) hdr << "endian: little\n";
    hdr << "encoding: " << (encoding == NrrdEncoding::Raw ? "raw" : "gzip") << "\n"
        << "space origin: " << format_vec(g.origin, true) << "\n\n";

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("nrrd: cannot write " + path.string());
    const std::string h = hdr.str();
    f.write(h.data(), static_cast<std::streamsize>(h.size()));
    const std::string body = encoding == NrrdEncoding::Raw ? payload : gzip(payload);
    f.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!f) throw Error("nrrd: write failed for " + path.string());
}

template <typename T>
void append_le(std::string& out, T v) {
    unsigned char tmp[sizeof(T)];
    std::memcpy(tmp, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(tmp, tmp + sizeof(T));
    out.append(reinterpret_cast<const char*>(tmp), sizeof(T));
}

}  // namespace

ImageVolume read_nrrd(const std::filesystem::path& path) {
    Decoded d = decode(path);
    return ImageVolume(d.geometry, std::move(d.values));
}

RoiMask read_mask_nrrd(const std::filesystem::path& path) {
    Decoded d = decode(path);
    std::vector<std::uint8_t> bits(d.values.size());
    std::transform(d.values.begin(), d.values.end(), bits.begin(),
                   [](double v) { return static_cast<std::uint8_t>(v != 0.0 ? 1 : 0); });
    return RoiMask(d.geometry, std::move(bits));
}

void write_nrrd(const ImageVolume& volume, const std::filesystem::path& path, NrrdType type,
                NrrdEncoding encoding) {
    std::string payload;
    payload.reserve(volume.size() * element_size(type));
    for (double v : volume.voxels()) {
        switch (type) {
            case NrrdType::Int16: {
                const double r = std::round(v);
                if (r < std::numeric_limits<std::int16_t>::min() || r > std::numeric_limits<std::int16_t>::max()) {
                    throw InvalidArgument("nrrd: value out of int16 range");
                }
                append_le(payload, static_cast<std::int16_t>(r));
                break;
            }
            case NrrdType::Float32: append_le(payload, static_cast<float>(v)); break;
            case NrrdType::UInt8: {
                const double r = std::round(v);
                if (r < 0 || r > 255) throw InvalidArgument("nrrd: value out of uint8 range");
                payload.push_back(static_cast<char>(static_cast<std::uint8_t>(r)));
                break;
            }
        }
    }
    write_payload(volume.geometry(), type, encoding, payload, path);
}

void write_nrrd(const RoiMask& mask, const std::filesystem::path& path, NrrdEncoding encoding) {
    std::string payload(mask.voxels().begin(), mask.voxels().end());
    write_payload(mask.geometry(), NrrdType::UInt8, encoding, payload, path);
}

}  // namespace radiomx
