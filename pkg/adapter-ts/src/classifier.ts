/**
 * Built-in fallback classifier: labels an image by its dominant mean
 * channel. Pure pixel arithmetic, no model, no dependencies, so the example
 * adapter runs anywhere. Replace the handler below to plug in a real
 * detector or classifier.
 */

import { readFileSync } from 'fs';

import { decodePng } from './png';
import { ResponsePayload, Task } from './protocol';

const LABELS: Array<'red' | 'green' | 'blue'> = ['red', 'green', 'blue'];

/** Dominant mean channel of the image; ties resolve in red, green, blue order. */
export function classifyDominantColor(imagePath: string): string {
  let pixels: Uint8Array;
  try {
    pixels = decodePng(readFileSync(imagePath)).pixels;
  } catch {
    throw new Error(`cannot read image: ${imagePath}`);
  }
  const sums = [0, 0, 0];
  for (let i = 0; i < pixels.length; i += 3) {
    sums[0] += pixels[i];
    sums[1] += pixels[i + 1];
    sums[2] += pixels[i + 2];
  }
  let best = 0;
  for (let c = 1; c < 3; c++) {
    if (sums[c] > sums[best]) best = c;
  }
  return LABELS[best];
}

/**
 * Protocol handler wrapping the fallback classifier.
 *
 * To serve a real model instead, swap the classifyDominantColor call for
 * your own inference, e.g.:
 *
 *   const label = await myModel.predict(imagePath);   // your network here
 *   return { status: 'ok', label };
 *
 * or, for a detector, return
 *   { status: 'ok', detections: [{ label, score, bbox: [x, y, w, h] }] }.
 */
export function fallbackHandler(imagePath: string, task: Task): ResponsePayload {
  if (task !== 'classification') {
    return { status: 'err', message: `unsupported task: ${task}` };
  }
  return { status: 'ok', label: classifyDominantColor(imagePath) };
}
