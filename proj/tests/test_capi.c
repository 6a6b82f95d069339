#include "grk/grk.h"

#include <stdio.h>
#include <string.h>

static int failures = 0;

#define EXPECT(cond)                                                      \
    do {                                                                  \
        if (!(cond)) {                                                    \
            fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond);    \
            ++failures;                                                   \
        }                                                                 \
    } while (0)

int main(void)
{
    char path[1024];
    char name[64];
    grk_robot* robot = NULL;
    grk_bvh* bvh = NULL;
    grk_motion* motion = NULL;
    grk_bvh_info info;
    double root[3] = {0, 0, 0.8};
    double quat[4] = {1, 0, 0, 0};
    double q[29] = {0};
    double pos[3 * 64];

    EXPECT(strlen(grk_version()) > 0);

    EXPECT(grk_robot_load("/nonexistent/robot.desc", &robot) == GRK_E_IO);
    EXPECT(robot == NULL);
    EXPECT(strlen(grk_last_error()) > 0);
    EXPECT(grk_robot_load(NULL, &robot) == GRK_E_USAGE);

    snprintf(path, sizeof path, "%s/g1_29dof.desc", GRK_DATA_DIR);
    EXPECT(grk_robot_load(path, &robot) == GRK_OK);
    EXPECT(grk_robot_dof_count(robot) == 29);
    EXPECT(grk_robot_body_count(robot) <= 64);
    EXPECT(grk_robot_body_name(robot, 0, name, sizeof name) == GRK_OK);
    EXPECT(grk_robot_body_name(robot, 10000, name, sizeof name) == GRK_E_USAGE);
    EXPECT(grk_robot_fk(robot, root, quat, q, 29, pos) == GRK_OK);
    EXPECT(grk_robot_fk(robot, root, quat, q, 3, pos) != GRK_OK);

    snprintf(path, sizeof path, "%s/fixtures/walk.bvh", GRK_DATA_DIR);
    EXPECT(grk_bvh_load(path, 0.0, &bvh) == GRK_OK);
    EXPECT(grk_bvh_info_get(bvh, &info) == GRK_OK);
    EXPECT(info.frames == 120);
    EXPECT(info.unit_scale == 0.01);

    snprintf(path, sizeof path, "%s/human_to_g1.corr", GRK_DATA_DIR);
    {
        char cfg[1024];
        snprintf(cfg, sizeof cfg, "%s/retarget.cfg", GRK_DATA_DIR);
        EXPECT(grk_retarget(bvh, robot, path, cfg, &motion) == GRK_OK);
    }
    EXPECT(grk_motion_frame_count(motion) == 120);
    EXPECT(grk_motion_frame_rate(motion) > 29.99 && grk_motion_frame_rate(motion) < 30.01);
    EXPECT(grk_retarget(bvh, robot, "/nonexistent.corr", NULL, &motion) != GRK_OK);

    grk_motion_free(motion);
    grk_bvh_free(bvh);
    grk_robot_free(robot);
    grk_motion_free(NULL);
    grk_bvh_free(NULL);
    grk_robot_free(NULL);
    grk_rvq_free(NULL);

    if (failures) fprintf(stderr, "%d failures\n", failures);
    return failures ? 1 : 0;
}
