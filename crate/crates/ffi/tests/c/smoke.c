#include <stdio.h>
#include <string.h>
#include "ucpt.h"

int main(void) {
    double values[40 * 2];
    for (int i = 0; i < 40; i++) {
        values[2 * i] = (i % 7) * 0.1 + (i >= 20 ? 5.0 : 0.0);
        values[2 * i + 1] = (i % 5) * 0.2;
    }
    UcptData *data = NULL;
    if (ucpt_data_new(values, 40, 2, &data) != UCPT_STATUS_OK) return 10;
    if (ucpt_data_nrows(data) != 40 || ucpt_data_ncols(data) != 2) return 11;

    UcptTestResult *res = NULL;
    if (ucpt_run_test(data, UCPT_KERNEL_SIGN, 0.05, 200, 7, &res) != UCPT_STATUS_OK) return 12;
    UcptSummary s;
    if (ucpt_test_result_summary(res, &s) != UCPT_STATUS_OK) return 13;
    if (!s.reject || s.bootstrap != 200 || s.seed != 7) return 14;

    char *json = ucpt_test_result_to_json(res);
    if (json == NULL || strstr(json, "\"kernel\":\"sign\"") == NULL) return 15;
    printf("%s\n", json);
    ucpt_string_free(json);
    ucpt_test_result_free(res);

    UcptTestResult *bad = NULL;
    if (ucpt_run_test(data, UCPT_KERNEL_LINEAR, 1.5, 200, 7, &bad) != UCPT_STATUS_INVALID_PARAMETER) return 16;
    if (ucpt_last_error_message() == NULL) return 17;

    ucpt_data_free(data);
    return 0;
}
