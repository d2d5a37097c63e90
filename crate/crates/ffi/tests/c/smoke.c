#include <stdio.h>
#include <string.h>
#include "treecut.h"

static const char *BLOCK =
    "p ssc 5\n"
    "e 1 3 1/3\ne 3 2 1/3\ne 1 4 1/3\ne 4 2 1/3\ne 1 5 1/3\ne 5 2 1/3\n"
    "d 3 4 1/3\nd 4 5 1/3\nd 3 5 1/3\nd 1 2 1\n";

int main(void) {
    TreecutInstance *inst = NULL;
    if (treecut_instance_parse(BLOCK, &inst) != TREECUT_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", treecut_last_error());
        return 1;
    }
    TreecutResult *res = NULL;
    TreecutStatus st = treecut_solve(inst, &res);
    if (st != TREECUT_STATUS_OK) {
        fprintf(stderr, "solve: %s\n", treecut_last_error());
        return 1;
    }
    uint32_t side[8];
    size_t n = treecut_result_cut(res, side, 8);
    printf("%s %zu\n", treecut_result_sparsity_text(res), n);
    treecut_result_free(res);
    treecut_instance_free(inst);

    TreecutInstance *bad = NULL;
    st = treecut_instance_parse("p ssc 1\nx\n", &bad);
    printf("%d %d\n", (int)st, bad == NULL);
    return 0;
}
