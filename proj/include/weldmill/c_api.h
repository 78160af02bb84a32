#ifndef WELDMILL_C_API_H
#define WELDMILL_C_API_H

/* Flat C surface over the object API. Handles are opaque 64-bit ids; 0 is
 * never a valid handle. Values cross in the boundary byte format, types and
 * fragments as text. Calls that fail return 0 (handles, counts), -1 (status)
 * or NULL (strings) and record a diagnostic for weldmill_last_error. */

#include <stdint.h>

#if defined(_WIN32)
#define WELDMILL_API __declspec(dllexport)
#elif defined(WELDMILL_BUILDING_C_API)
#define WELDMILL_API __attribute__((visibility("default")))
#else
#define WELDMILL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef uint64_t weldmill_handle;

/* Wraps `size` bytes at `data` holding one value of type `type`. The buffer
 * is borrowed: it must stay alive and unchanged until every evaluation that
 * depends on the object has returned. */
WELDMILL_API weldmill_handle weldmill_new_data_object(const void* data, uint64_t size, const char* type);

/* `fragment` names deps[i] as vi. `result_type` may be NULL to infer it. */
WELDMILL_API weldmill_handle weldmill_new_computed_object(const weldmill_handle* deps, uint64_t ndeps,
                                                          const char* fragment, const char* result_type);

/* Type text, valid until the next call on this thread. */
WELDMILL_API const char* weldmill_object_type(weldmill_handle object);

/* `options` is NULL or space-separated settings: threads=N memory_limit=N
 * strategy=local|shared|global grain=N O0 O3 no-<pass>. Returns a result
 * handle; stage failures are reported through weldmill_result_error. */
WELDMILL_API weldmill_handle weldmill_evaluate(weldmill_handle object, const char* options);

WELDMILL_API int weldmill_free_object(weldmill_handle object);
WELDMILL_API int weldmill_free_result(weldmill_handle result);

/* Result accessors. Returned memory belongs to the result and stays valid
 * until it is freed. */
WELDMILL_API int weldmill_result_ok(weldmill_handle result);
WELDMILL_API const uint8_t* weldmill_result_data(weldmill_handle result, uint64_t* size);
WELDMILL_API const char* weldmill_result_type(weldmill_handle result);
WELDMILL_API const char* weldmill_result_error(weldmill_handle result);
WELDMILL_API const char* weldmill_result_stats(weldmill_handle result);

/* JSON diagnostic of the last failed call on this thread, or NULL. */
WELDMILL_API const char* weldmill_last_error(void);

/* Number of engine evaluations performed by this process. */
WELDMILL_API uint64_t weldmill_evaluation_count(void);

#ifdef __cplusplus
}
#endif

#endif
