#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fetmosaic/consistency.hpp"
#include "fetmosaic/dataset_io.hpp"
#include "fetmosaic/errors.hpp"
#include "fetmosaic/homography.hpp"
#include "fetmosaic/mosaic.hpp"
#include "fetmosaic/png_io.hpp"
#include "fetmosaic/registration.hpp"
#include "fetmosaic/seg_metrics.hpp"
#include "fetmosaic/serialize.hpp"
#include "fetmosaic/synthetic.hpp"
#include "fetmosaic/warp.hpp"

namespace fs = std::filesystem;
using namespace fetmosaic;

namespace {

std::string frame_name(size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%05zu.png", i);
    return buf;
}

struct LoadedSequence {
    SequenceManifest manifest;
    std::vector<Image> frames; // single-channel
    FovMask fov;
};

LoadedSequence load_frames(const fs::path& dir, double margin) {
    LoadedSequence seq;
    seq.manifest = load_sequence(dir, false);
    for (const auto& p : seq.manifest.frame_paths)
        seq.frames.push_back(to_gray(read_png(p.string())));
    const fs::path mask_path = dir / "fov_mask.png";
    if (fs::exists(mask_path)) {
        seq.fov = read_png_mask(mask_path.string());
        if (seq.fov.width != seq.manifest.width || seq.fov.height != seq.manifest.height)
            throw ResolutionMismatch("fov_mask.png resolution differs from frames");
    } else {
        seq.fov = circular_mask(seq.manifest.width, seq.manifest.height, margin);
    }
    return seq;
}

std::string consistency_csv(
    const std::vector<std::pair<PairSpec, ConsistencyOutcome>>& results) {
    std::ostringstream csv;
    csv << "source_index,target_index,status,overlap_fraction,ssim\n";
    for (const auto& [spec, outcome] : results) {
        csv << spec.source_index << ',' << spec.target_index << ','
            << (outcome.status == ConsistencyStatus::scored ? "scored"
                                                            : "failed_low_overlap")
            << ',' << format_double(outcome.overlap_fraction) << ',';
        if (outcome.ssim) csv << format_double(*outcome.ssim);
        csv << '\n';
    }
    return csv.str();
}

// SSIM-vs-pair line plot; failed pairs break the polyline.
std::string consistency_svg(
    const std::vector<std::pair<PairSpec, ConsistencyOutcome>>& results) {
    const int width = 800, height = 300, ml = 50, mr = 15, mt = 15, mb = 35;
    const double px = ml, pw = width - ml - mr;
    const double py = mt, ph = height - mt - mb;
    const size_t n = results.size();

    auto xpos = [&](size_t i) {
        return n > 1 ? px + pw * static_cast<double>(i) / (n - 1) : px + pw / 2;
    };
    auto ypos = [&](double ssim) { return py + ph * (1.0 - (ssim + 1.0) / 2.0); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\">\n";
    svg << "<rect x=\"" << px << "\" y=\"" << py << "\" width=\"" << pw
        << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double tick : {-1.0, -0.5, 0.0, 0.5, 1.0})
        svg << "<text x=\"5\" y=\"" << format_double(ypos(tick) + 4)
            << "\" font-size=\"11\">" << format_double(tick) << "</text>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 10
        << "\" font-size=\"11\" text-anchor=\"middle\">pair index</text>\n";

    bool open = false;
    std::ostringstream points;
    auto flush = [&] {
        if (open)
            svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" "
                   "points=\""
                << points.str() << "\"/>\n";
        points.str("");
        open = false;
    };
    for (size_t i = 0; i < n; ++i) {
        const auto& outcome = results[i].second;
        if (outcome.status != ConsistencyStatus::scored) {
            flush();
            continue;
        }
        points << format_double(xpos(i)) << ',' << format_double(ypos(*outcome.ssim))
               << ' ';
        open = true;
    }
    flush();
    svg << "</svg>\n";
    return svg.str();
}

int cmd_synth(const TrajectorySpec& spec, const fs::path& out) {
    const SyntheticSequence seq = generate_sequence(spec);
    fs::create_directories(out / "images");
    fs::create_directories(out / "vessels");
    for (size_t i = 0; i < seq.frames.size(); ++i) {
        write_png((out / "images" / frame_name(i)).string(), seq.frames[i]);
        write_png((out / "vessels" / frame_name(i)).string(), seq.vessel_frames[i]);
    }
    write_png((out / "fov_mask.png").string(), seq.fov);

    HomographySet gt;
    gt.video_id = out.filename().string();
    gt.frame_count = seq.frames.size();
    gt.pairwise = seq.gt_pairwise;
    gt.absolute = seq.gt_absolute;
    save_homographies(out / "gt_homographies.json", gt);

    const SequenceManifest manifest = load_sequence(out, false);
    write_text_file(out / "manifest.json", manifest_to_json(manifest));
    return 0;
}

int cmd_register(const fs::path& input, const fs::path& out_json,
                 const fs::path& out_csv, const RegistrationConfig& cfg,
                 double margin, bool use_vessels) {
    LoadedSequence seq = load_frames(input, margin);
    if (use_vessels) {
        const fs::path vdir = input / "vessels";
        if (!fs::is_directory(vdir))
            throw MissingDirectory("no vessels/ directory in " + input.string());
        seq.frames.clear();
        std::vector<fs::path> paths;
        for (const auto& e : fs::directory_iterator(vdir))
            if (e.path().extension() == ".png") paths.push_back(e.path());
        std::sort(paths.begin(), paths.end());
        for (const auto& p : paths) seq.frames.push_back(to_gray(read_png(p.string())));
    }
    const auto results = register_sequence(seq.frames, seq.fov, cfg);

    HomographySet set;
    set.video_id = seq.manifest.video_id;
    set.frame_count = seq.frames.size();
    for (const auto& r : results) set.pairwise.push_back(r.h);
    save_homographies(out_json, set);

    if (!out_csv.empty()) {
        std::ostringstream csv;
        csv << "pair_index,converged,final_residual,iterations_level0\n";
        for (size_t i = 0; i < results.size(); ++i)
            csv << i << ',' << (results[i].converged ? 1 : 0) << ','
                << format_double(results[i].final_residual) << ','
                << (results[i].iterations_used.empty()
                        ? 0
                        : results[i].iterations_used.front())
                << '\n';
        write_text_file(out_csv, csv.str());
    }
    return 0;
}

int cmd_mosaic(const fs::path& input, const fs::path& homographies_file,
               const fs::path& out_png, size_t anchor, BlendMode blend,
               const fs::path& drift_csv, fs::path gt_file, double margin,
               int first, int last) {
    LoadedSequence seq = load_frames(input, margin);
    const HomographySet set = load_homographies(homographies_file);
    if (set.pairwise.size() + 1 != seq.frames.size())
        throw LengthMismatch("mosaic: " + std::to_string(set.pairwise.size()) +
                             " pairwise transforms for " +
                             std::to_string(seq.frames.size()) + " frames");

    if (gt_file.empty() && fs::exists(input / "gt_homographies.json"))
        gt_file = input / "gt_homographies.json";
    std::vector<Homography> gt_absolute;
    if (!gt_file.empty() && fs::exists(gt_file))
        gt_absolute = load_homographies(gt_file).absolute;

    // Optional frame range, inclusive.
    size_t lo = 0, hi = seq.frames.size() - 1;
    if (first >= 0) lo = static_cast<size_t>(first);
    if (last >= 0) hi = static_cast<size_t>(last);
    if (lo > hi || hi >= seq.frames.size())
        throw IndexOutOfRange("mosaic: invalid frame range");
    std::vector<Image> frames(seq.frames.begin() + lo, seq.frames.begin() + hi + 1);
    std::vector<Homography> pairwise(set.pairwise.begin() + lo,
                                     set.pairwise.begin() + hi);
    if (anchor < lo || anchor > hi)
        throw IndexOutOfRange("mosaic: anchor outside frame range");
    const size_t local_anchor = anchor - lo;

    const MosaicLayout lay = layout(std::span<const Homography>(pairwise),
                                    seq.manifest.width, seq.manifest.height,
                                    local_anchor);
    auto [canvas, covered] = render(std::span<const Image>(frames), seq.fov, lay,
                                    blend);
    for (size_t i = 0; i < canvas.data.size(); ++i)
        if (!covered.data[i]) canvas.data[i] = 0.0;
    write_png(out_png.string(), canvas);

    for (size_t idx : lay.excluded_frames)
        std::cerr << "warning: frame " << lo + idx
                  << " exceeds the canvas cap, not rendered\n";

    if (!drift_csv.empty() && !gt_absolute.empty()) {
        if (gt_absolute.size() != seq.frames.size())
            throw LengthMismatch("mosaic: ground-truth count differs from frames");
        // Re-base ground truth onto the local anchor.
        std::vector<Homography> gt_local;
        const Homography anchor_inv = invert(gt_absolute[anchor]);
        for (size_t i = lo; i <= hi; ++i)
            gt_local.push_back(compose(anchor_inv, gt_absolute[i]));
        const auto report = drift_report(lay, seq.manifest.width,
                                         seq.manifest.height, gt_local);
        std::ostringstream csv;
        csv << "frame_index,corner_error_px\n";
        for (const DriftEntry& e : report)
            csv << lo + e.frame_index << ','
                << (e.available ? format_double(e.corner_error_px) : "") << '\n';
        write_text_file(drift_csv, csv.str());
    }
    return 0;
}

int cmd_eval_consistency(const fs::path& input, const fs::path& homographies_file,
                         size_t gap, const fs::path& out_csv,
                         const fs::path& out_svg, double margin) {
    LoadedSequence seq = load_frames(input, margin);
    const HomographySet set = load_homographies(homographies_file);
    if (set.pairwise.size() + 1 != seq.frames.size())
        throw LengthMismatch("eval-consistency: " +
                             std::to_string(set.pairwise.size()) +
                             " pairwise transforms for " +
                             std::to_string(seq.frames.size()) + " frames");
    const auto results = sequence_consistency(seq.frames, set.pairwise, gap, seq.fov);
    write_text_file(out_csv, consistency_csv(results));
    if (!out_svg.empty()) write_text_file(out_svg, consistency_svg(results));
    return 0;
}

std::vector<fs::path> label_files(const fs::path& video_dir) {
    fs::path dir = video_dir;
    if (fs::is_directory(video_dir / "labels")) dir = video_dir / "labels";
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".png")
            out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

int cmd_eval_seg(const fs::path& pred_dir, const fs::path& gt_dir,
                 const fs::path& fold_file, const fs::path& out_csv,
                 IouPooling pooling) {
    if (!fs::is_directory(gt_dir))
        throw MissingDirectory("eval-seg: " + gt_dir.string() + " does not exist");
    const FoldConfig folds =
        fold_file.empty() ? default_fold_config() : load_fold_config(fold_file);

    std::vector<std::string> videos;
    for (const auto& e : fs::directory_iterator(gt_dir))
        if (e.is_directory()) videos.push_back(e.path().filename().string());
    std::sort(videos.begin(), videos.end());
    if (videos.empty()) throw EmptyInput("eval-seg: no video directories in " +
                                         gt_dir.string());

    std::vector<FrameCounts> per_frame;
    for (const std::string& video : videos) {
        const auto gt_files = label_files(gt_dir / video);
        if (!fs::is_directory(pred_dir / video))
            throw MissingDirectory("eval-seg: missing predictions for " + video);
        const auto pred_files = label_files(pred_dir / video);
        if (gt_files.size() != pred_files.size())
            throw LengthMismatch("eval-seg: " + video + " has " +
                                 std::to_string(pred_files.size()) +
                                 " predictions for " +
                                 std::to_string(gt_files.size()) + " labels");
        for (size_t i = 0; i < gt_files.size(); ++i) {
            const LabelMask gt = read_png_labels(gt_files[i].string());
            const LabelMask pred = read_png_labels(pred_files[i].string());
            per_frame.push_back({video, confusion(pred, gt)});
        }
    }

    auto write_rows = [](std::ostringstream& csv, const std::vector<GroupIou>& rows) {
        for (const GroupIou& r : rows) {
            csv << r.group << ',' << r.frame_count;
            for (const auto& v : r.class_iou)
                csv << ',' << (v ? format_double(*v) : "");
            csv << ',' << (r.overall ? format_double(*r.overall) : "") << '\n';
        }
    };

    std::ostringstream csv;
    csv << "group,frames,bg,vessel,tool,fetus,overall\n";
    write_rows(csv, aggregate(per_frame, Grouping::per_video, nullptr, pooling));
    bool all_assigned = true;
    for (const std::string& v : videos)
        if (!folds.fold_of.count(v)) all_assigned = false;
    if (all_assigned && videos.size() > 1)
        write_rows(csv, aggregate(per_frame, Grouping::per_fold, &folds.fold_of,
                                  pooling));
    write_text_file(out_csv, csv.str());
    return 0;
}

int classify_error(const std::exception& e) {
    if (dynamic_cast<const SizeTooSmall*>(&e) ||
        dynamic_cast<const TooFewFrames*>(&e) ||
        dynamic_cast<const ImageTooSmall*>(&e) ||
        dynamic_cast<const IndexOutOfRange*>(&e) ||
        dynamic_cast<const IncompleteAssignment*>(&e) ||
        dynamic_cast<const FoldSizeViolation*>(&e) ||
        dynamic_cast<const EmptyInput*>(&e))
        return 2;
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fetoscopic frame registration, mosaicking and evaluation toolkit"};
    app.require_subcommand(1);

    // synth
    TrajectorySpec spec;
    fs::path synth_out;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic sequence with "
                                              "ground-truth homographies");
    synth->add_option("--frames", spec.n_frames, "Number of frames (>= 2)");
    synth->add_option("--size", spec.frame_size, "Square frame size in pixels");
    synth->add_option("--seed", spec.seed, "Random seed");
    synth->add_option("--translation", spec.max_step_translation, "Max px/frame");
    synth->add_option("--rotation", spec.max_step_rotation, "Max degrees/frame");
    synth->add_option("--scale", spec.max_step_scale, "Max scale fraction/frame");
    synth->add_option("--perspective", spec.perspective_jitter, "Row-3 magnitude");
    synth->add_option("--noise", spec.noise_sigma, "Additive Gaussian sigma");
    synth->add_option("--out", synth_out, "Output directory")->required();

    // register
    fs::path reg_in, reg_out, reg_csv;
    RegistrationConfig reg_cfg;
    double reg_margin = 0.0;
    bool reg_vessels = false;
    std::string reg_param = "affine";
    auto* reg = app.add_subcommand("register", "Pairwise registration of a sequence");
    reg->add_option("--input", reg_in, "Sequence directory")->required();
    reg->add_option("--out", reg_out, "Output homographies JSON")->required();
    reg->add_option("--residuals", reg_csv, "Per-pair residual CSV");
    reg->add_option("--levels", reg_cfg.pyramid_levels, "Pyramid levels")
        ->check(CLI::PositiveNumber);
    reg->add_option("--iterations", reg_cfg.max_iterations_per_level,
                    "Max iterations per level")
        ->check(CLI::PositiveNumber);
    reg->add_option("--epsilon", reg_cfg.convergence_epsilon,
                    "Convergence threshold, px")
        ->check(CLI::PositiveNumber);
    reg->add_option("--min-overlap", reg_cfg.min_valid_overlap_fraction,
                    "Minimum valid masked pixel fraction")
        ->check(CLI::Range(1e-9, 1.0));
    reg->add_option("--parameterization", reg_param, "affine | projective")
        ->check(CLI::IsMember({"affine", "projective"}));
    reg->add_option("--margin", reg_margin, "FOV margin fraction")
        ->check(CLI::Range(0.0, 0.499));
    reg->add_flag("--vessels", reg_vessels, "Register vessel maps instead of frames");

    // mosaic
    fs::path mos_in, mos_h, mos_out, mos_drift, mos_gt;
    size_t mos_anchor = 0;
    std::string mos_blend = "overwrite_latest";
    double mos_margin = 0.0;
    int mos_first = -1, mos_last = -1;
    auto* mos = app.add_subcommand("mosaic", "Render a mosaic from pairwise "
                                             "homographies");
    mos->add_option("--input", mos_in, "Sequence directory")->required();
    mos->add_option("--homographies", mos_h, "Pairwise homographies JSON")->required();
    mos->add_option("--out", mos_out, "Output mosaic PNG")->required();
    mos->add_option("--anchor", mos_anchor, "Anchor frame index");
    mos->add_option("--blend", mos_blend, "overwrite_latest | running_mean")
        ->check(CLI::IsMember({"overwrite_latest", "running_mean"}));
    mos->add_option("--drift", mos_drift, "Drift report CSV (needs ground truth)");
    mos->add_option("--gt", mos_gt, "Ground-truth homographies JSON");
    mos->add_option("--margin", mos_margin, "FOV margin fraction")
        ->check(CLI::Range(0.0, 0.499));
    mos->add_option("--first", mos_first, "First frame of the rendered range");
    mos->add_option("--last", mos_last, "Last frame of the rendered range");

    // eval-consistency
    fs::path cons_in, cons_h, cons_csv, cons_svg;
    size_t cons_gap = 5;
    double cons_margin = 0.0;
    auto* cons = app.add_subcommand("eval-consistency",
                                    "Pairwise SSIM consistency metric");
    cons->add_option("--input", cons_in, "Sequence directory")->required();
    cons->add_option("--homographies", cons_h, "Pairwise homographies JSON")
        ->required();
    cons->add_option("--gap", cons_gap, "Frame gap between pairs")
        ->check(CLI::PositiveNumber);
    cons->add_option("--out", cons_csv, "Per-pair CSV")->required();
    cons->add_option("--plot", cons_svg, "SSIM line plot SVG");
    cons->add_option("--margin", cons_margin, "FOV margin fraction")
        ->check(CLI::Range(0.0, 0.499));

    // eval-seg
    fs::path seg_pred, seg_gt, seg_folds, seg_out;
    std::string seg_pooling = "frame_mean";
    auto* seg = app.add_subcommand("eval-seg", "Per-class IoU evaluation");
    seg->add_option("--pred", seg_pred, "Predicted label directory")->required();
    seg->add_option("--gt", seg_gt, "Ground-truth label directory")->required();
    seg->add_option("--folds", seg_folds, "Fold config file (default: embedded)");
    seg->add_option("--out", seg_out, "Output CSV")->required();
    seg->add_option("--pooling", seg_pooling, "frame_mean | pixel_pooled")
        ->check(CLI::IsMember({"frame_mean", "pixel_pooled"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        if (synth->parsed()) {
            if (spec.n_frames < 2) {
                std::cerr << "error: --frames must be >= 2 (n_frames >= 2)\n";
                return 2;
            }
            return cmd_synth(spec, synth_out);
        }
        if (reg->parsed()) {
            reg_cfg.parameterization = reg_param == "projective"
                                           ? Parameterization::projective8
                                           : Parameterization::affine6;
            return cmd_register(reg_in, reg_out, reg_csv, reg_cfg, reg_margin,
                                reg_vessels);
        }
        if (mos->parsed())
            return cmd_mosaic(mos_in, mos_h, mos_out, mos_anchor,
                              mos_blend == "running_mean" ? BlendMode::running_mean
                                                          : BlendMode::overwrite_latest,
                              mos_drift, mos_gt, mos_margin, mos_first, mos_last);
        if (cons->parsed())
            return cmd_eval_consistency(cons_in, cons_h, cons_gap, cons_csv,
                                        cons_svg, cons_margin);
        if (seg->parsed())
            return cmd_eval_seg(seg_pred, seg_gt, seg_folds, seg_out,
                                seg_pooling == "pixel_pooled"
                                    ? IouPooling::pixel_pooled
                                    : IouPooling::frame_mean);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return classify_error(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
