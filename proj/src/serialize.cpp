#include "fetmosaic/serialize.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fetmosaic/errors.hpp"

namespace fetmosaic {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

nlohmann::json matrices_to_json(const std::vector<Homography>& hs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Homography& h : hs) {
        nlohmann::json row = nlohmann::json::array();
        for (double v : h.m) row.push_back(v);
        arr.push_back(std::move(row));
    }
    return arr;
}

std::vector<Homography> matrices_from_json(const nlohmann::json& arr) {
    std::vector<Homography> hs;
    for (const auto& row : arr) {
        if (!row.is_array() || row.size() != 9)
            throw IoError("homography entry must be an array of 9 numbers");
        Homography h;
        for (int i = 0; i < 9; ++i) h.m[i] = row[i].get<double>();
        hs.push_back(h);
    }
    return hs;
}

} // namespace

std::string homographies_to_json(const HomographySet& set) {
    nlohmann::json j;
    j["video_id"] = set.video_id;
    j["frame_count"] = set.frame_count;
    j["pairwise"] = matrices_to_json(set.pairwise);
    if (!set.absolute.empty()) j["absolute"] = matrices_to_json(set.absolute);
    return j.dump(2) + "\n";
}

HomographySet homographies_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("invalid homography JSON: ") + e.what());
    }
    HomographySet set;
    set.video_id = j.value("video_id", "");
    set.frame_count = j.value("frame_count", size_t{0});
    if (j.contains("pairwise")) set.pairwise = matrices_from_json(j["pairwise"]);
    if (j.contains("absolute")) set.absolute = matrices_from_json(j["absolute"]);
    if (set.frame_count == 0) set.frame_count = set.pairwise.size() + 1;
    return set;
}

HomographySet load_homographies(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return homographies_from_json(ss.str());
}

void save_homographies(const std::filesystem::path& file, const HomographySet& set) {
    write_text_file(file, homographies_to_json(set));
}

void write_text_file(const std::filesystem::path& file, const std::string& content) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write " + file.string());
    out << content;
    if (!out) throw IoError("write failed for " + file.string());
}

} // namespace fetmosaic
