/**
 * Entry point: serve the fallback classifier over stdin/stdout.
 *
 *   node dist/adapter.js
 *
 * Point the test framework at it with:  --sut "node /path/to/dist/adapter.js"
 */

import { fallbackHandler } from './classifier';
import { serve } from './protocol';

serve(fallbackHandler);
