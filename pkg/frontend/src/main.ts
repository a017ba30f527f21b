import { HttpApiClient, type Label } from './api.js';
import { AnnotationFlow } from './model.js';
import { bindKeyboard, bindPointer, renderDone, renderOffline, renderTask } from './view.js';
import { SharedViewport } from './viewport.js';

function annotatorToken(): string {
  const fromQuery = new URLSearchParams(window.location.search).get('annotator');
  if (fromQuery) return fromQuery;
  const stored = window.localStorage.getItem('annotator');
  if (stored) return stored;
  const token = window.prompt('Annotator token:') ?? '';
  window.localStorage.setItem('annotator', token);
  return token;
}

async function run(): Promise<void> {
  const root = document.getElementById('app');
  if (!root) throw new Error('missing #app container');
  const flow = new AnnotationFlow(new HttpApiClient(), annotatorToken());

  const draw = () => {
    const state = flow.state;
    if (!state) return;
    if (state.kind === 'done') {
      renderDone(root, state.labeled);
      return;
    }
    if (state.kind === 'offline') {
      renderOffline(root, async () => {
        await flow.retry();
        draw();
      });
      return;
    }
    const viewport = new SharedViewport();
    const session = state.session;
    const onLabel = (variantId: number, label: Label) => {
      session.setLabel(variantId, label);
      renderTask(root, session, viewport, handlers);
      bindPointerOnce();
    };
    const handlers = {
      onLabel,
      onSubmit: async () => {
        await flow.submit();
        draw();
      },
      onRetryImages: () => {
        renderTask(root, session, viewport, handlers);
        bindPointerOnce();
      },
    };
    const bindPointerOnce = () => {
      const screen = root.querySelector<HTMLElement>('.screen');
      if (screen) bindPointer(screen, viewport);
    };
    renderTask(root, session, viewport, handlers);
    bindPointerOnce();
  };

  bindKeyboard(
    window,
    () => (flow.state?.kind === 'task' ? flow.state.session : null),
    (variantId, label) => {
      if (flow.state?.kind === 'task') {
        flow.state.session.setLabel(variantId, label);
        draw();
      }
    },
  );

  await flow.start();
  draw();
}

run().catch((err) => {
  const root = document.getElementById('app');
  if (root) {
    root.textContent = `Failed to start: ${err}`;
  }
});
