#include "manip/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <png.h>
#include <json.hpp>

namespace manip::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void format_error(const fs::path& path, const std::string& detail) {
    throw Error(ErrorCode::FormatError, path.string() + ": " + detail);
}

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return in;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    return out;
}

// PNM-style token: skips whitespace and '#' comments.
std::string next_pnm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (!std::isspace(c)) {
            tok.push_back(static_cast<char>(c));
            break;
        }
    }
    while ((c = in.get()) != EOF && !std::isspace(c)) tok.push_back(static_cast<char>(c));
    return tok;
}

int parse_positive_int(const std::string& tok, const fs::path& path, const char* what) {
    try {
        size_t pos = 0;
        const long v = std::stol(tok, &pos);
        if (pos != tok.size() || v <= 0 || v > 1 << 20)
            format_error(path, std::string("bad ") + what + " '" + tok + "'");
        return static_cast<int>(v);
    } catch (const std::logic_error&) {
        format_error(path, std::string("bad ") + what + " '" + tok + "'");
    }
}

}  // namespace

// ---------------------------------------------------------------- PFM depth

DepthMap read_depth(const fs::path& path) {
    auto in = open_input(path);
    const std::string magic = next_pnm_token(in);
    if (magic == "PF") format_error(path, "color PFM not supported, expected 'Pf'");
    if (magic != "Pf") format_error(path, "bad magic '" + magic + "', expected 'Pf'");
    const int width = parse_positive_int(next_pnm_token(in), path, "width");
    const int height = parse_positive_int(next_pnm_token(in), path, "height");
    const std::string scale_tok = next_pnm_token(in);
    double scale = 0.0;
    try {
        scale = std::stod(scale_tok);
    } catch (const std::logic_error&) {
        format_error(path, "bad scale '" + scale_tok + "'");
    }
    if (scale >= 0.0) format_error(path, "big-endian PFM (scale >= 0) not supported");

    DepthMap depth(width, height);
    const size_t row_bytes = static_cast<size_t>(width) * sizeof(float);
    // PFM rows run bottom-to-top.
    for (int v = height - 1; v >= 0; --v) {
        in.read(reinterpret_cast<char*>(&depth.values[static_cast<size_t>(v) * width]),
                static_cast<std::streamsize>(row_bytes));
        if (static_cast<size_t>(in.gcount()) != row_bytes) {
            const auto offset = static_cast<long long>(in.tellg());
            format_error(path, "truncated payload at byte offset " +
                                   std::to_string(offset < 0 ? 0 : offset));
        }
    }
    if (in.peek() != EOF) format_error(path, "trailing bytes after payload");
    return depth;
}

void write_depth(const DepthMap& depth, const fs::path& path) {
    auto out = open_output(path);
    out << "Pf\n" << depth.width << " " << depth.height << "\n-1.0\n";
    for (int v = depth.height - 1; v >= 0; --v)
        out.write(reinterpret_cast<const char*>(&depth.values[static_cast<size_t>(v) * depth.width]),
                  static_cast<std::streamsize>(depth.width * sizeof(float)));
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

// ---------------------------------------------------------------- PGM masks

BinaryMask read_mask(const fs::path& path) {
    auto in = open_input(path);
    const std::string magic = next_pnm_token(in);
    if (magic != "P5") format_error(path, "bad magic '" + magic + "', expected 'P5'");
    const int width = parse_positive_int(next_pnm_token(in), path, "width");
    const int height = parse_positive_int(next_pnm_token(in), path, "height");
    const std::string maxval = next_pnm_token(in);
    if (maxval != "255") format_error(path, "maxval must be 255, got '" + maxval + "'");

    std::vector<std::uint8_t> raw(static_cast<size_t>(width) * height);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<size_t>(in.gcount()) != raw.size())
        format_error(path, "truncated payload");
    if (in.peek() != EOF) format_error(path, "trailing bytes after payload");

    BinaryMask mask(width, height);
    for (size_t i = 0; i < raw.size(); ++i) mask.bits[i] = raw[i] != 0 ? 1 : 0;
    return mask;
}

void write_mask(const BinaryMask& mask, const fs::path& path) {
    auto out = open_output(path);
    out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
    for (std::uint8_t b : mask.bits) out.put(b ? char(255) : char(0));
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

// ---------------------------------------------------------------- PNG images

namespace {

struct PngReadGuard {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* file = nullptr;
    ~PngReadGuard() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (file) std::fclose(file);
    }
};

struct PngWriteGuard {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* file = nullptr;
    ~PngWriteGuard() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (file) std::fclose(file);
    }
};

}  // namespace

Image read_image(const fs::path& path) {
    PngReadGuard g;
    g.file = std::fopen(path.c_str(), "rb");
    if (!g.file) throw Error(ErrorCode::IoError, "cannot open " + path.string());

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, g.file) != 8 || png_sig_cmp(sig, 0, 8))
        format_error(path, "not a PNG file");

    g.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    g.info = png_create_info_struct(g.png);
    if (!g.png || !g.info) throw Error(ErrorCode::IoError, "libpng init failed");
    if (setjmp(png_jmpbuf(g.png))) format_error(path, "PNG decode failure");

    png_init_io(g.png, g.file);
    png_set_sig_bytes(g.png, 8);
    png_read_info(g.png, g.info);

    png_set_expand(g.png);           // palette / gray / bit-depth < 8 -> 8-bit
    png_set_strip_16(g.png);
    png_set_strip_alpha(g.png);
    png_set_gray_to_rgb(g.png);
    png_read_update_info(g.png, g.info);

    const int width = static_cast<int>(png_get_image_width(g.png, g.info));
    const int height = static_cast<int>(png_get_image_height(g.png, g.info));
    if (png_get_channels(g.png, g.info) != 3)
        format_error(path, "unexpected channel count after conversion");

    Image image(width, height);
    std::vector<png_bytep> rows(height);
    for (int v = 0; v < height; ++v)
        rows[v] = reinterpret_cast<png_bytep>(&image.pixels[static_cast<size_t>(v) * width]);
    static_assert(sizeof(Rgb8) == 3);
    png_read_image(g.png, rows.data());
    png_read_end(g.png, nullptr);
    return image;
}

void write_image(const Image& image, const fs::path& path) {
    PngWriteGuard g;
    g.file = std::fopen(path.c_str(), "wb");
    if (!g.file) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");

    g.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    g.info = png_create_info_struct(g.png);
    if (!g.png || !g.info) throw Error(ErrorCode::IoError, "libpng init failed");
    if (setjmp(png_jmpbuf(g.png)))
        throw Error(ErrorCode::IoError, "PNG encode failure: " + path.string());

    png_init_io(g.png, g.file);
    png_set_IHDR(g.png, g.info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(g.png, g.info);
    for (int v = 0; v < image.height; ++v)
        png_write_row(g.png, reinterpret_cast<png_const_bytep>(
                                 &image.pixels[static_cast<size_t>(v) * image.width]));
    png_write_end(g.png, nullptr);
}

// ---------------------------------------------------------------- camera JSON

namespace {

json parse_json_file(const fs::path& path) {
    auto in = open_input(path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) format_error(path, "invalid JSON");
    return j;
}

double require_number(const json& j, const char* key, const fs::path& path) {
    if (!j.contains(key) || !j[key].is_number())
        format_error(path, std::string("missing or non-numeric field '") + key + "'");
    return j[key].get<double>();
}

}  // namespace

CameraModel read_camera(const fs::path& path) {
    const json j = parse_json_file(path);
    CameraModel cam;
    const int width = static_cast<int>(require_number(j, "width", path));
    const int height = static_cast<int>(require_number(j, "height", path));
    if (width <= 0 || height <= 0) format_error(path, "non-positive dimensions");

    if (j.contains("fx") || j.contains("fy") || j.contains("cx") || j.contains("cy")) {
        cam.intrinsics.fx = require_number(j, "fx", path);
        cam.intrinsics.fy = require_number(j, "fy", path);
        cam.intrinsics.cx = require_number(j, "cx", path);
        cam.intrinsics.cy = require_number(j, "cy", path);
        cam.intrinsics.width = width;
        cam.intrinsics.height = height;
        cam.intrinsics.validate();
    } else {
        cam.intrinsics = CameraIntrinsics::default_for(width, height);
    }

    if (j.contains("R")) {
        const auto& r = j["R"];
        if (!r.is_array() || r.size() != 9) format_error(path, "R must hold 9 numbers");
        for (size_t i = 0; i < 9; ++i) cam.pose.rotation[i] = r[i].get<double>();
    }
    if (j.contains("t")) {
        const auto& t = j["t"];
        if (!t.is_array() || t.size() != 3) format_error(path, "t must hold 3 numbers");
        cam.pose.translation = {t[0].get<double>(), t[1].get<double>(), t[2].get<double>()};
    }
    cam.pose.validate();
    return cam;
}

void write_camera(const CameraModel& camera, const fs::path& path) {
    json j;
    j["width"] = camera.intrinsics.width;
    j["height"] = camera.intrinsics.height;
    j["fx"] = camera.intrinsics.fx;
    j["fy"] = camera.intrinsics.fy;
    j["cx"] = camera.intrinsics.cx;
    j["cy"] = camera.intrinsics.cy;
    j["R"] = camera.pose.rotation;
    j["t"] = {camera.pose.translation.x, camera.pose.translation.y,
              camera.pose.translation.z};
    auto out = open_output(path);
    out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------- CTOK tokens

namespace {

constexpr char kTokenMagic[4] = {'C', 'T', 'O', 'K'};
constexpr std::uint32_t kTokenVersion = 1;

std::uint32_t read_u32_le(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>((v >> 8) & 0xff),
                                static_cast<unsigned char>((v >> 16) & 0xff),
                                static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

CameraTokenSet read_tokens(const fs::path& path) {
    auto in = open_input(path);
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, kTokenMagic, 4) != 0)
        format_error(path, "bad magic, expected 'CTOK'");
    const std::uint32_t version = read_u32_le(in);
    if (version != kTokenVersion)
        format_error(path, "unsupported version " + std::to_string(version));
    const std::uint32_t count = read_u32_le(in);
    const std::uint32_t dim = read_u32_le(in);
    if (!in) format_error(path, "truncated header");
    if (count == 0 || dim == 0) format_error(path, "count and dim must be positive");
    if (count > (1u << 24) || dim > (1u << 16)) format_error(path, "implausible dimensions");

    CameraTokenSet tokens;
    tokens.count = static_cast<int>(count);
    tokens.dim = static_cast<int>(dim);
    tokens.vectors.resize(static_cast<size_t>(count) * dim);
    const size_t payload = tokens.vectors.size() * sizeof(float);
    in.read(reinterpret_cast<char*>(tokens.vectors.data()),
            static_cast<std::streamsize>(payload));
    if (static_cast<size_t>(in.gcount()) != payload)
        format_error(path, "payload shorter than count*dim*4 bytes");
    if (in.peek() != EOF) format_error(path, "trailing bytes after payload");
    for (float f : tokens.vectors)
        if (!std::isfinite(f)) format_error(path, "non-finite token entry");
    return tokens;
}

void write_tokens(const CameraTokenSet& tokens, const fs::path& path) {
    auto out = open_output(path);
    out.write(kTokenMagic, 4);
    write_u32_le(out, kTokenVersion);
    write_u32_le(out, static_cast<std::uint32_t>(tokens.count));
    write_u32_le(out, static_cast<std::uint32_t>(tokens.dim));
    out.write(reinterpret_cast<const char*>(tokens.vectors.data()),
              static_cast<std::streamsize>(tokens.vectors.size() * sizeof(float)));
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

// ---------------------------------------------------------------- PLY clouds

void write_ply(const PointCloud& cloud, const fs::path& path) {
    auto out = open_output(path);
    const bool colored = cloud.has_colors();
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << cloud.size() << "\n";
    out << "property float x\nproperty float y\nproperty float z\n";
    if (colored)
        out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out << "end_header\n";
    char buf[160];
    for (size_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud.points[i];
        if (colored) {
            const Rgb8& c = cloud.colors[i];
            std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g %d %d %d\n", p.x, p.y, p.z,
                          c.r, c.g, c.b);
        } else {
            std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g\n", p.x, p.y, p.z);
        }
        out << buf;
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

PointCloud read_ply(const fs::path& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line) || line != "ply") format_error(path, "missing 'ply' magic");
    if (!std::getline(in, line) || line != "format ascii 1.0")
        format_error(path, "only ascii 1.0 PLY supported");

    size_t vertex_count = 0;
    std::vector<std::string> properties;
    bool in_vertex = false;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "comment") continue;
        if (word == "element") {
            std::string name;
            ls >> name >> vertex_count;
            in_vertex = (name == "vertex");
            if (!in_vertex) format_error(path, "unsupported element '" + name + "'");
        } else if (word == "property") {
            std::string type, name;
            ls >> type >> name;
            if (in_vertex) properties.push_back(name);
        } else if (word == "end_header") {
            break;
        } else {
            format_error(path, "unexpected header line '" + line + "'");
        }
    }
    const bool colored = properties.size() == 6;
    if (properties.size() != 3 && !colored)
        format_error(path, "expected 3 or 6 vertex properties");

    // Bulk-parse the vertex list; manifests reference clouds with millions
    // of vertices, so strtod on a flat buffer instead of per-line streams.
    std::string payload((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    const char* cur = payload.c_str();
    const char* const end = cur + payload.size();
    auto next_double = [&](size_t vertex) {
        char* after = nullptr;
        const double v = std::strtod(cur, &after);
        if (after == cur || after > end)
            format_error(path, "bad vertex " + std::to_string(vertex));
        cur = after;
        return v;
    };
    PointCloud cloud;
    cloud.points.reserve(vertex_count);
    if (colored) cloud.colors.reserve(vertex_count);
    for (size_t i = 0; i < vertex_count; ++i) {
        Vec3 p;
        p.x = next_double(i);
        p.y = next_double(i);
        p.z = next_double(i);
        cloud.points.push_back(p);
        if (colored) {
            const double r = next_double(i), g = next_double(i), b = next_double(i);
            if (r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255)
                format_error(path, "color out of range on vertex " + std::to_string(i));
            cloud.colors.push_back({static_cast<std::uint8_t>(r),
                                    static_cast<std::uint8_t>(g),
                                    static_cast<std::uint8_t>(b)});
        }
    }
    while (cur < end && std::isspace(static_cast<unsigned char>(*cur))) ++cur;
    if (cur != end) format_error(path, "trailing data after vertex list");
    return cloud;
}

// ---------------------------------------------------------------- manifests

namespace {

[[noreturn]] void line_error(const fs::path& path, size_t line, const std::string& detail) {
    throw Error(ErrorCode::FormatError,
                path.string() + ":" + std::to_string(line) + ": " + detail);
}

BoundingBox parse_box(const json& j, const fs::path& path, size_t line, const char* key) {
    if (!j.is_array() || j.size() != 4)
        line_error(path, line, std::string(key) + " must be [x_min, y_min, x_max, y_max]");
    BoundingBox b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                  j[3].get<double>()};
    b.validate();
    return b;
}

Vec3 parse_vec3(const json& j, const fs::path& path, size_t line, const char* key) {
    if (!j.is_array() || j.size() != 3)
        line_error(path, line, std::string(key) + " must be [x, y, z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::string require_existing_path(const json& rec, const char* key, const fs::path& path,
                                  size_t line) {
    if (!rec.contains(key) || !rec[key].is_string())
        line_error(path, line, std::string("missing field '") + key + "'");
    const auto file = rec[key].get<std::string>();
    const fs::path resolved = fs::path(file).is_absolute()
                                  ? fs::path(file)
                                  : path.parent_path() / file;
    if (!fs::exists(resolved))
        line_error(path, line, std::string("referenced file does not exist: ") + file);
    return resolved.string();
}

}  // namespace

std::vector<ManifestRecord> read_manifest(const fs::path& path) {
    auto in = open_input(path);
    std::vector<ManifestRecord> records;
    std::string line;
    size_t lineno = 0;
    std::set<std::pair<std::string, std::string>> seen;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            line_error(path, lineno, "malformed JSON record");

        ManifestRecord rec;
        if (!j.contains("item_id") || !j["item_id"].is_string())
            line_error(path, lineno, "missing field 'item_id'");
        if (!j.contains("object_id") || !j["object_id"].is_string())
            line_error(path, lineno, "missing field 'object_id'");
        rec.item_id = j["item_id"].get<std::string>();
        rec.object_id = j["object_id"].get<std::string>();
        if (!seen.insert({rec.item_id, rec.object_id}).second)
            line_error(path, lineno,
                       "duplicate (item, object) id (" + rec.item_id + ", " + rec.object_id + ")");

        rec.localized = j.value("localized", true);
        if (!j.contains("gt_box")) line_error(path, lineno, "missing field 'gt_box'");
        rec.gt_box = parse_box(j["gt_box"], path, lineno, "gt_box");
        rec.gt_mask_path = require_existing_path(j, "gt_mask", path, lineno);
        rec.gt_depth_path = require_existing_path(j, "gt_depth", path, lineno);
        rec.gt_cloud_path = require_existing_path(j, "gt_cloud", path, lineno);
        rec.scene_cloud_path = require_existing_path(j, "scene_cloud_gt", path, lineno);

        if (rec.localized) {
            if (!j.contains("pred_box")) line_error(path, lineno, "missing field 'pred_box'");
            rec.pred_box = parse_box(j["pred_box"], path, lineno, "pred_box");
            rec.pred_mask_path = require_existing_path(j, "pred_mask", path, lineno);
            rec.pred_depth_path = require_existing_path(j, "pred_depth", path, lineno);
            rec.pred_cloud_path = require_existing_path(j, "pred_cloud", path, lineno);
            if (!j.contains("dino_similarity") || !j["dino_similarity"].is_number())
                line_error(path, lineno, "missing field 'dino_similarity'");
            rec.dino_similarity = j["dino_similarity"].get<double>();
            if (rec.dino_similarity < 0.0 || rec.dino_similarity > 1.0)
                line_error(path, lineno, "dino_similarity outside [0,1]");
            if (!j.contains("v_pred")) line_error(path, lineno, "missing field 'v_pred'");
            if (!j.contains("v_gt")) line_error(path, lineno, "missing field 'v_gt'");
            rec.v_pred = parse_vec3(j["v_pred"], path, lineno, "v_pred");
            rec.v_gt = parse_vec3(j["v_gt"], path, lineno, "v_gt");
        }
        if (j.contains("deqa")) rec.deqa = j["deqa"].get<double>();
        if (j.contains("phys_vlm")) rec.phys_vlm = j["phys_vlm"].get<double>();
        if (j.contains("prompt")) rec.prompt = j["prompt"].get<std::string>();
        records.push_back(std::move(rec));
    }
    return records;
}

ObjectEvalInput load_eval_input(const ManifestRecord& record,
                                const RelocationPair& relocation_defaults) {
    ObjectEvalInput input;
    input.item_id = record.item_id;
    input.object_id = record.object_id;
    input.localized = record.localized;
    input.gt_box = record.gt_box;
    input.gt_mask = read_mask(record.gt_mask_path);
    input.gt_depth = read_depth(record.gt_depth_path);
    input.gt_cloud = read_ply(record.gt_cloud_path);
    input.scene_cloud_gt = read_ply(record.scene_cloud_path);
    input.deqa = record.deqa;
    input.phys_vlm = record.phys_vlm;
    if (record.localized) {
        input.pred_box = *record.pred_box;
        input.pred_mask = read_mask(*record.pred_mask_path);
        input.pred_depth = read_depth(*record.pred_depth_path);
        input.pred_cloud = read_ply(*record.pred_cloud_path);
        input.dino_similarity = record.dino_similarity;
        input.relocation = relocation_defaults;
        input.relocation.v_pred = record.v_pred;
        input.relocation.v_gt = record.v_gt;
    }
    return input;
}

namespace {

json metric_json(const MetricValue& v) {
    return {{"raw", v.raw}, {"normalized", v.normalized}, {"penalty", v.penalty_applied}};
}

json report_json(const MetricReport& r) {
    json j;
    j["item_id"] = r.item_id;
    j["object_id"] = r.object_id;
    j["localized"] = r.localized;
    j["diou"] = metric_json(r.diou);
    j["mask_iou"] = metric_json(r.mask_iou);
    j["absrel"] = metric_json(r.absrel);
    j["delta_1_25"] = metric_json(r.delta_ratio);
    j["chamfer"] = metric_json(r.chamfer);
    j["centroid"] = metric_json(r.centroid);
    j["ra_dino"] = metric_json(r.ra_dino);
    if (r.deqa) j["deqa"] = *r.deqa;
    if (r.phys_vlm) j["phys_vlm"] = *r.phys_vlm;
    return j;
}

json map_json(const LinearMap& m) {
    return {{"value_at_zero", m.value_at_zero}, {"value_at_hundred", m.value_at_hundred}};
}

}  // namespace

void write_report(const std::vector<MetricReport>& per_object,
                  const MetricReport& summary, const NormalizationSpec& norm,
                  const fs::path& path) {
    auto out = open_output(path);
    for (const auto& r : per_object) {
        json j = report_json(r);
        j["kind"] = "object";
        out << j.dump() << "\n";
    }
    json s = report_json(summary);
    s["kind"] = "summary";
    s["normalization"] = {{"diou", map_json(norm.diou)},
                          {"mask_iou", map_json(norm.mask_iou)},
                          {"absrel", map_json(norm.absrel)},
                          {"delta_1_25", map_json(norm.delta_ratio)},
                          {"chamfer", map_json(norm.chamfer)},
                          {"centroid", map_json(norm.centroid)},
                          {"ra_dino", map_json(norm.ra_dino)}};
    out << s.dump() << "\n";
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

std::vector<FrameManifestRecord> read_frame_manifest(const fs::path& path) {
    auto in = open_input(path);
    std::vector<FrameManifestRecord> records;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            line_error(path, lineno, "malformed JSON record");
        FrameManifestRecord rec;
        if (!j.contains("frame_index") || !j["frame_index"].is_number_integer())
            line_error(path, lineno, "missing field 'frame_index'");
        rec.frame_index = j["frame_index"].get<int>();
        rec.depth_path = require_existing_path(j, "depth", path, lineno);
        rec.mask_path = require_existing_path(j, "mask", path, lineno);
        rec.camera_path = require_existing_path(j, "camera", path, lineno);
        records.push_back(std::move(rec));
    }
    return records;
}

namespace {

json vec3_json(const Vec3& v) { return {v.x, v.y, v.z}; }

}  // namespace

std::vector<PairManifestRecord> read_pair_manifest(const fs::path& path) {
    auto in = open_input(path);
    std::vector<PairManifestRecord> records;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            line_error(path, lineno, "malformed JSON record");
        PairManifestRecord rec;
        rec.clip_id = j.value("clip_id", "");
        if (!j.contains("i") || !j.contains("j"))
            line_error(path, lineno, "missing pair indices");
        rec.selection.i = j["i"].get<int>();
        rec.selection.j = j["j"].get<int>();
        rec.selection.displacement = j.value("displacement", 0.0);
        if (j.contains("delta"))
            rec.selection.delta = parse_vec3(j["delta"], path, lineno, "delta");
        rec.selection.short_clip_rule_used = j.value("short_clip_rule_used", false);
        if (j.contains("centroid_i"))
            rec.centroid_i = parse_vec3(j["centroid_i"], path, lineno, "centroid_i");
        if (j.contains("centroid_j"))
            rec.centroid_j = parse_vec3(j["centroid_j"], path, lineno, "centroid_j");
        if (j.contains("keep")) rec.keep = j["keep"].get<bool>();
        records.push_back(std::move(rec));
    }
    return records;
}

void write_pair_manifest(const std::vector<PairManifestRecord>& records,
                         const fs::path& path) {
    auto out = open_output(path);
    for (const auto& rec : records) {
        json j;
        j["clip_id"] = rec.clip_id;
        j["i"] = rec.selection.i;
        j["j"] = rec.selection.j;
        j["displacement"] = rec.selection.displacement;
        j["delta"] = vec3_json(rec.selection.delta);
        j["short_clip_rule_used"] = rec.selection.short_clip_rule_used;
        j["centroid_i"] = vec3_json(rec.centroid_i);
        j["centroid_j"] = vec3_json(rec.centroid_j);
        if (rec.keep) j["keep"] = *rec.keep;
        out << j.dump() << "\n";
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

void write_clip_ranges(const std::vector<FrameRange>& ranges, const fs::path& path) {
    auto out = open_output(path);
    for (size_t i = 0; i < ranges.size(); ++i) {
        json j;
        j["clip_id"] = "clip_" + std::to_string(i);
        j["begin"] = ranges[i].begin;
        j["end"] = ranges[i].end;
        j["cluster"] = ranges[i].cluster;
        out << j.dump() << "\n";
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace manip::io
