#include <stdio.h>
#include <stdlib.h>
#include "tilespec.h"

int main(void) {
    const char *text = "rule tm\nkind symbolic\ndim 1\nalphabet 0 1\nmap 0 -> 0 1\nmap 1 -> 1 0\n";
    TsRule *rule = NULL;
    if (ts_rule_parse(text, &rule) != TS_STATUS_OK) {
        fprintf(stderr, "%s\n", ts_last_error());
        return 1;
    }
    size_t len = 0;
    ts_superword(rule, 0, 3, NULL, 0, &len);
    uint32_t *buf = malloc(len * sizeof *buf);
    if (ts_superword(rule, 0, 3, buf, len, &len) != TS_STATUS_OK) {
        fprintf(stderr, "%s\n", ts_last_error());
        return 1;
    }
    printf("len %zu:", len);
    for (size_t i = 0; i < len; i++) printf(" %u", buf[i]);
    printf("\nschema %s\n", ts_schema_version());
    free(buf);
    ts_rule_free(rule);
    return 0;
}
