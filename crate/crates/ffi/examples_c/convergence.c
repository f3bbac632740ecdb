#include <stdio.h>
#include "h3rect.h"

int main(void) {
    size_t levels[] = {4, 8, 16};
    H3Report *report = NULL;
    H3Status st = h3rect_convergence("adini", "smooth2d", levels, 3, NULL, &report);
    if (st != H3_STATUS_OK) {
        fprintf(stderr, "error %d: %s\n", (int)st, h3rect_last_error());
        return 1;
    }
    char *csv = h3rect_report_csv(report);
    fputs(csv, stdout);
    h3rect_string_free(csv);
    h3rect_report_free(report);
    return 0;
}
