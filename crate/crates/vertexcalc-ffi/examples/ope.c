/* cc -Iinclude examples/ope.c ../../target/release/libvertexcalc_ffi.a -lm -lpthread -ldl */
#include <stdio.h>
#include "vertexcalc.h"

int main(void) {
    VcSession *s = NULL;
    VcOpe *o = NULL;
    if (vc_session_new(2, &s) != VC_STATUS_OK) {
        fprintf(stderr, "%s\n", vc_last_error());
        return 1;
    }
    if (vc_ope(s, "phiB", "phiB", NULL, 0, &o) != VC_STATUS_OK) {
        fprintf(stderr, "%s\n", vc_last_error());
        vc_session_free(s);
        return 1;
    }
    char *json = vc_ope_to_json(o);
    printf("%s\n", json);
    vc_string_free(json);
    vc_ope_free(o);
    vc_session_free(s);
    return 0;
}
