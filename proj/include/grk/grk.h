/*
 * C interface to the gesture retargeting toolkit.
 *
 * Objects are opaque handles released with their *_free function. Every call
 * returns a grk_status; on failure grk_last_error() describes the problem for
 * the calling thread until its next call into the library.
 */
#ifndef GRK_H
#define GRK_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(GRK_BUILDING_LIBRARY)
#    define GRK_API __declspec(dllexport)
#  else
#    define GRK_API __declspec(dllimport)
#  endif
#else
#  define GRK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum grk_status {
    GRK_OK = 0,
    GRK_E_USAGE = 1,    /* bad arguments or configuration */
    GRK_E_DATA = 2,     /* malformed or inconsistent input data */
    GRK_E_IO = 3,       /* file could not be read or written */
    GRK_E_INTERNAL = 4
} grk_status;

GRK_API const char* grk_version(void);
GRK_API const char* grk_last_error(void);

/* ---- BVH documents ---------------------------------------------------- */

typedef struct grk_bvh grk_bvh;

typedef struct grk_bvh_info {
    size_t joints;       /* including end sites */
    size_t channels;
    size_t frames;
    double frame_time;   /* seconds */
    double unit_scale;   /* meters per file unit */
} grk_bvh_info;

/* unit_scale <= 0 selects the automatic centimeter/meter heuristic. */
GRK_API grk_status grk_bvh_load(const char* path, double unit_scale, grk_bvh** out);
GRK_API grk_status grk_bvh_save(const grk_bvh* bvh, const char* path);
GRK_API grk_status grk_bvh_info_get(const grk_bvh* bvh, grk_bvh_info* info);
/* Writes the frames as a motion clip interchange file (radians, meters). */
GRK_API grk_status grk_bvh_save_clip(const grk_bvh* bvh, const char* path);
GRK_API grk_status grk_bvh_resample(grk_bvh* bvh, double frame_rate);
GRK_API void grk_bvh_free(grk_bvh* bvh);

/* ---- robot descriptions ----------------------------------------------- */

typedef struct grk_robot grk_robot;

GRK_API grk_status grk_robot_load(const char* path, grk_robot** out);
GRK_API grk_status grk_robot_from_bvh(const grk_bvh* bvh, grk_robot** out);
GRK_API grk_status grk_robot_save(const grk_robot* robot, const char* path);
GRK_API size_t grk_robot_body_count(const grk_robot* robot);
GRK_API size_t grk_robot_dof_count(const grk_robot* robot);
/* Copies the body name (NUL terminated, truncated to capacity). */
GRK_API grk_status grk_robot_body_name(const grk_robot* robot, size_t body, char* buf, size_t capacity);
/* root_quat is (w, x, y, z); out_positions receives 3 * body_count values. */
GRK_API grk_status grk_robot_fk(const grk_robot* robot, const double root_pos[3], const double root_quat[4],
                                const double* joint_angles, size_t dof_count, double* out_positions);
GRK_API void grk_robot_free(grk_robot* robot);

/* ---- robot motion ------------------------------------------------------ */

typedef struct grk_motion grk_motion;

GRK_API grk_status grk_motion_load(const char* path, grk_motion** out);
/* extended != 0 appends root orientation and angular velocity columns. */
GRK_API grk_status grk_motion_save(const grk_motion* motion, const char* path, int extended);
GRK_API size_t grk_motion_frame_count(const grk_motion* motion);
GRK_API double grk_motion_frame_rate(const grk_motion* motion);
GRK_API grk_status grk_motion_resample(grk_motion* motion, double frame_rate);
/* Writes per-frame world positions of every body: `frame body x y z` rows. */
GRK_API grk_status grk_motion_fk_save(const grk_motion* motion, const grk_robot* robot, const char* path);
GRK_API void grk_motion_free(grk_motion* motion);

/* ---- retargeting ------------------------------------------------------- */

GRK_API grk_status grk_retarget(const grk_bvh* bvh, const grk_robot* robot, const char* correspondence_path,
                                const char* config_path, grk_motion** out);

/* ---- metrics ----------------------------------------------------------- */

typedef enum grk_report_format { GRK_REPORT_TXT = 0, GRK_REPORT_CSV = 1 } grk_report_format;

/* Joint-wise RMSE table of test against ref, followed by artifact scores when
 * robot is non-NULL. */
GRK_API grk_status grk_metrics_report(const grk_motion* ref, const grk_motion* test, const grk_robot* robot,
                                      grk_report_format format, const char* out_path);

/* ---- residual vector quantization -------------------------------------- */

typedef struct grk_rvq grk_rvq;

typedef struct grk_rvq_params {
    const char* part;    /* "body" or "hand" */
    size_t layers;
    size_t codes;
    size_t window;
    uint64_t seed;
} grk_rvq_params;

GRK_API grk_status grk_rvq_train(const grk_motion* const* corpus, size_t count, const grk_rvq_params* params,
                                 grk_rvq** out);
GRK_API grk_status grk_rvq_load(const char* path, grk_rvq** out);
GRK_API grk_status grk_rvq_save(const grk_rvq* model, const char* path);
GRK_API grk_status grk_rvq_encode(const grk_rvq* model, const grk_motion* motion, const char* tokens_path);
/* Either token file may be NULL when the matching model is NULL. Uncovered
 * joints are written as zero. */
GRK_API grk_status grk_rvq_decode(const grk_rvq* body, const char* body_tokens, const grk_rvq* hand,
                                  const char* hand_tokens, const grk_robot* robot, double frame_rate,
                                  const char* motion_path);
/* Cumulative per-layer MSE curve of a motion under the model, one value per layer. */
GRK_API grk_status grk_rvq_reconstruction_error(const grk_rvq* model, const grk_motion* motion, double* out,
                                                size_t capacity, size_t* layers);
GRK_API void grk_rvq_free(grk_rvq* model);

/* ---- audio features and tokens ----------------------------------------- */

GRK_API grk_status grk_audio_features(const char* wav_path, const char* config_path, const char* out_path);
GRK_API grk_status grk_quantize_audio(const char* features_path, size_t codes, uint64_t seed,
                                      const char* codebook_path, const char* tokens_path);

/* ---- generation -------------------------------------------------------- */

GRK_API grk_status grk_train_ngram(const char* const* motion_token_paths, const char* const* audio_token_paths,
                                   size_t count, size_t order, double alpha, const char* model_path);
GRK_API grk_status grk_generate(const char* model_path, const char* audio_tokens_path, uint64_t seed,
                                double temperature, size_t max_frames, const char* out_path);
/* rvq_hand may be NULL for single-part token files. Writes the spliced stack;
 * *spliced is set to 0 when no library entry matches. */
GRK_API grk_status grk_splice(const char* library_path, const char* keywords, const char* tokens_path,
                              size_t at_frame, size_t crossfade, const grk_rvq* rvq_body, const grk_rvq* rvq_hand,
                              const char* out_path, int* spliced);

/* ---- control mapping --------------------------------------------------- */

/* scales_path may be NULL for the default per-joint scales. */
GRK_API grk_status grk_control_map(const grk_motion* motion, const char* actions_path, const char* scales_path,
                                   const grk_robot* robot, const char* out_path);

/* ---- end-to-end pipeline ----------------------------------------------- */

typedef struct grk_pipeline_options {
    const char* keywords;     /* NULL: no semantic splice */
    int64_t splice_at;        /* < 0: middle frame */
    const char* train_corpus; /* NULL: use the configured models */
} grk_pipeline_options;

GRK_API grk_status grk_pipeline(const char* config_path, const char* wav_path, const char* out_dir,
                                const grk_pipeline_options* options);

#ifdef __cplusplus
}
#endif

#endif /* GRK_H */
