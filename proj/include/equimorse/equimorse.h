#ifndef EQUIMORSE_H
#define EQUIMORSE_H

#include <stddef.h>

#if defined(EQUIMORSE_BUILDING)
#define EM_API __attribute__((visibility("default")))
#else
#define EM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum em_status {
  EM_OK = 0,
  EM_VALIDATION = 2,
  EM_NUMERICAL = 3,
  EM_USAGE = 64,
  EM_INTERNAL = 70
} em_status;

typedef struct em_complex em_complex;
typedef struct em_germ em_germ;

/* Last error message on this thread, empty when none. Owned by the library. */
EM_API const char* em_last_error(void);
EM_API const char* em_version(void);

/* Chain complex with cyclic action from its JSON document. */
EM_API em_status em_complex_from_json(const char* json, em_complex** out);
EM_API void em_complex_free(em_complex* c);
/* Betti number in degree `deg` of the complex or of its invariant subcomplex. */
EM_API em_status em_complex_betti(const em_complex* c, int deg, int invariant, long* out);

/* Hamiltonian germ from explicit terms or a preset object. */
EM_API em_status em_germ_from_json(const char* json, em_germ** out);
EM_API void em_germ_free(em_germ* g);
EM_API em_status em_germ_cz(const em_germ* g, int k, int* out);

/* Runs one CLI invocation. `out` and `err` receive strings to release with
   em_string_free; the return value is the process exit code. */
EM_API int em_run_command(int argc, const char* const* argv, char** out, char** err);
EM_API void em_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
