/** DOM rendering: original on the left, the four variants on the right
 * in exactly the server-given slot order. Variant model identity is
 * carried only in data attributes for submission; nothing on screen
 * reveals which model produced which patch.
 */

import { LABELS, type Label } from './api.js';
import type { TaskSession } from './model.js';
import { SharedViewport } from './viewport.js';

export interface ViewHandlers {
  onLabel(variantId: number, label: Label): void;
  onSubmit(): void;
  onRetryImages(): void;
}

const LABEL_KEYS: Record<string, Label> = {
  p: 'Positive',
  s: 'Similar',
  n: 'Negative',
};

function pane(
  url: string,
  alt: string,
  viewport: SharedViewport,
  onImageError: () => void,
): HTMLElement {
  const box = document.createElement('div');
  box.className = 'pane';
  const frame = document.createElement('div');
  frame.className = 'frame';
  const img = document.createElement('img');
  img.src = url;
  img.alt = alt;
  img.draggable = false;
  img.addEventListener('error', onImageError);
  viewport.subscribe(() => {
    img.style.transform = viewport.cssTransform();
  });
  frame.appendChild(img);
  box.appendChild(frame);
  return box;
}

export function renderTask(
  root: HTMLElement,
  session: TaskSession,
  viewport: SharedViewport,
  handlers: ViewHandlers,
): void {
  root.textContent = '';
  const screen = document.createElement('div');
  screen.className = 'screen';

  let failures = 0;
  const onImageError = () => {
    failures += 1;
    banner.hidden = false;
  };

  const original = pane(session.task.original_url, 'original patch', viewport, onImageError);
  original.classList.add('original');
  original.dataset.role = 'original';
  const caption = document.createElement('div');
  caption.className = 'caption';
  caption.textContent = 'Original';
  original.appendChild(caption);
  screen.appendChild(original);

  const grid = document.createElement('div');
  grid.className = 'variants';
  for (const slot of session.task.slots) {
    const cell = pane(slot.url, `variant in position ${slot.slot + 1}`, viewport, onImageError);
    cell.classList.add('variant');
    cell.dataset.role = 'variant';
    cell.dataset.slot = String(slot.slot);
    cell.dataset.variantId = String(slot.variant_id);
    if (slot.slot === session.active) {
      cell.classList.add('active');
    }
    const controls = document.createElement('div');
    controls.className = 'labels';
    for (const label of LABELS) {
      const button = document.createElement('button');
      button.type = 'button';
      button.className = 'label';
      button.dataset.label = label;
      button.textContent = label;
      if (session.labelFor(slot.variant_id) === label) {
        button.classList.add('chosen');
      }
      button.addEventListener('click', () => handlers.onLabel(slot.variant_id, label));
      controls.appendChild(button);
    }
    const tag = document.createElement('div');
    tag.className = 'caption';
    tag.textContent = `Variant ${slot.slot + 1}`;
    cell.appendChild(tag);
    cell.appendChild(controls);
    cell.addEventListener('click', () => {
      session.setActive(slot.slot);
      refreshActive(screen, session);
    });
    grid.appendChild(cell);
  }
  screen.appendChild(grid);

  const banner = document.createElement('div');
  banner.className = 'load-error';
  banner.hidden = true;
  const note = document.createElement('span');
  note.textContent = 'Some patches failed to load.';
  const retry = document.createElement('button');
  retry.type = 'button';
  retry.className = 'retry-images';
  retry.textContent = 'Retry';
  retry.addEventListener('click', () => {
    banner.hidden = true;
    failures = 0;
    handlers.onRetryImages();
  });
  banner.append(note, retry);
  screen.appendChild(banner);

  const footer = document.createElement('footer');
  const submit = document.createElement('button');
  submit.type = 'button';
  submit.className = 'submit';
  submit.textContent = 'Submit group';
  submit.disabled = !session.canSubmit;
  submit.addEventListener('click', () => handlers.onSubmit());
  footer.appendChild(submit);
  screen.appendChild(footer);

  root.appendChild(screen);
}

function refreshActive(screen: HTMLElement, session: TaskSession): void {
  screen.querySelectorAll<HTMLElement>('[data-role="variant"]').forEach((cell) => {
    cell.classList.toggle('active', Number(cell.dataset.slot) === session.active);
  });
}

export function renderDone(root: HTMLElement, labeled: number): void {
  root.textContent = '';
  const box = document.createElement('div');
  box.className = 'done';
  box.textContent = `All assigned groups are labeled. Groups completed: ${labeled}.`;
  root.appendChild(box);
}

export function renderOffline(root: HTMLElement, onRetry: () => void): void {
  root.textContent = '';
  const box = document.createElement('div');
  box.className = 'offline';
  const note = document.createElement('p');
  note.textContent = 'Submission failed to reach the server. Your labels are kept unchanged.';
  const retry = document.createElement('button');
  retry.type = 'button';
  retry.className = 'retry-submit';
  retry.textContent = 'Retry submission';
  retry.addEventListener('click', onRetry);
  box.append(note, retry);
  root.appendChild(box);
}

/** Keyboard shortcuts: 1-4 select a variant pane, P/S/N label it. */
export function bindKeyboard(
  target: EventTarget,
  session: () => TaskSession | null,
  onLabel: (variantId: number, label: Label) => void,
): () => void {
  const handler = (event: Event) => {
    const key = (event as KeyboardEvent).key.toLowerCase();
    const current = session();
    if (!current) return;
    if (key >= '1' && key <= '4') {
      current.setActive(Number(key) - 1);
      return;
    }
    const label = LABEL_KEYS[key];
    if (label) {
      const slot = current.task.slots.find((s) => s.slot === current.active);
      if (slot) {
        onLabel(slot.variant_id, label);
      }
    }
  };
  target.addEventListener('keydown', handler);
  return () => target.removeEventListener('keydown', handler);
}

/** Wheel-to-zoom and drag-to-pan, shared across every pane. */
export function bindPointer(screen: HTMLElement, viewport: SharedViewport): void {
  screen.addEventListener('wheel', (event) => {
    event.preventDefault();
    const factor = (event as WheelEvent).deltaY < 0 ? 1.25 : 0.8;
    const rect = (event.target as HTMLElement).closest('.frame')?.getBoundingClientRect();
    const px = rect ? (event as WheelEvent).clientX - rect.left : 0;
    const py = rect ? (event as WheelEvent).clientY - rect.top : 0;
    viewport.zoomAt(px, py, factor);
  });
  let dragging = false;
  let last: [number, number] = [0, 0];
  screen.addEventListener('mousedown', (event) => {
    dragging = true;
    last = [(event as MouseEvent).clientX, (event as MouseEvent).clientY];
  });
  screen.addEventListener('mousemove', (event) => {
    if (!dragging) return;
    const e = event as MouseEvent;
    viewport.panBy(e.clientX - last[0], e.clientY - last[1]);
    last = [e.clientX, e.clientY];
  });
  screen.addEventListener('mouseup', () => {
    dragging = false;
  });
}
